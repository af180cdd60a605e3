//! The viscous contact wave: the self-similar solution Theta(eta),
//! eta = x / sqrt(1+t), of the nonlinear diffusion problem
//!
//!     -(eta/2) Theta' = (a(Theta) Theta')',   Theta(+-inf) = theta_-+^*,
//!
//! with a(Theta) = 9 p* kappa(Theta) / (10 Theta), together with the wave
//! fields it induces at constant pressure p*.

use crate::error::{Result, VpbError};
use crate::transport::TransportModel;

/// Tabulated self-similar temperature profile and its slope.
#[derive(Debug, Clone)]
pub struct ContactProfile {
    pub theta_minus_star: f64,
    pub theta_plus_star: f64,
    pub p_star: f64,
    pub u_star: f64,
    pub kappa: TransportModel,
    /// Symmetric grid on [-L, L].
    pub eta_grid: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_prime: Vec<f64>,
    /// Fitted Gaussian-tail constants: |Theta - theta_-+^*| <= c1 d^cd e^(-c2 eta^2).
    pub c1_est: f64,
    pub c2_est: f64,
}

/// Pointwise contact-wave fields and x-derivatives at a given (x, t).
#[derive(Debug, Clone, Copy)]
pub struct ContactPoint {
    pub eta: f64,
    pub theta: f64,
    pub theta_eta: f64,
    pub theta_eta_eta: f64,
    pub v: f64,
    pub u1: f64,
    /// U1_x has the closed form -eta Theta' / (3 p* (1+t)).
    pub u1_x: f64,
    pub u1_t: f64,
    pub v_t: f64,
    pub theta_x: f64,
    pub theta_xx: f64,
    pub theta_t: f64,
}

fn a_value(kappa: &TransportModel, p_star: f64, theta: f64) -> f64 {
    9.0 * p_star * kappa.value(theta) / (10.0 * theta)
}

fn a_derivative(kappa: &TransportModel, p_star: f64, theta: f64) -> f64 {
    9.0 * p_star / 10.0 * (kappa.derivative(theta) * theta - kappa.value(theta)) / (theta * theta)
}

/// One RK4 step of the first-order system [Theta, q = a(Theta) Theta'].
fn rk4_step(kappa: &TransportModel, p_star: f64, eta: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let f = |eta: f64, y: [f64; 2]| -> [f64; 2] {
        let tp = y[1] / a_value(kappa, p_star, y[0]);
        [tp, -(eta / 2.0) * tp]
    };
    let k1 = f(eta, y);
    let k2 = f(eta + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
    let k3 = f(eta + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
    let k4 = f(eta + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrate from the center to +-L and report the two end temperatures.
fn shoot(
    kappa: &TransportModel,
    p_star: f64,
    theta0: f64,
    slope0: f64,
    half_width: f64,
    steps: usize,
) -> (f64, f64) {
    let mut ends = [0.0; 2];
    for (k, sgn) in [(-1.0f64), 1.0].iter().enumerate() {
        let h = sgn * half_width / steps as f64;
        let mut y = [theta0, a_value(kappa, p_star, theta0) * slope0];
        let mut eta = 0.0;
        for _ in 0..steps {
            y = rk4_step(kappa, p_star, eta, y, h);
            eta += h;
            if !y[0].is_finite() || y[0] <= 0.0 {
                y[0] = f64::NAN;
                break;
            }
        }
        ends[k] = y[0];
    }
    (ends[0], ends[1])
}

/// Solve the two-point problem by shooting from the center: Newton on the
/// pair (Theta(0), Theta'(0)) against the two boundary mismatches. The
/// outward integrations follow the decaying Gaussian tails, so the map is
/// well conditioned.
pub fn contact_selfsimilar_solve(
    theta_minus_star: f64,
    theta_plus_star: f64,
    p_star: f64,
    u_star: f64,
    kappa: TransportModel,
    half_width: f64,
    n: usize,
) -> Result<ContactProfile> {
    if !(theta_minus_star > 0.0) || !(theta_plus_star > 0.0) || !(p_star > 0.0) {
        return Err(VpbError::Domain(
            "contact solve requires positive temperatures and pressure".into(),
        ));
    }
    if n < 9 || n % 2 == 0 {
        return Err(VpbError::Domain(format!(
            "grid size must be odd and at least 9, got {n}"
        )));
    }
    let steps = (n - 1) / 2;
    let scale = theta_minus_star.max(theta_plus_star);
    let jump = theta_plus_star - theta_minus_star;

    let mut theta0 = 0.5 * (theta_minus_star + theta_plus_star);
    let mut slope0 = jump / (4.0 * std::f64::consts::PI * a_value(&kappa, p_star, theta0)).sqrt();
    let mut converged = false;
    let mut res = [f64::INFINITY; 2];
    for _ in 0..60 {
        let (tm, tp) = shoot(&kappa, p_star, theta0, slope0, half_width, steps);
        if !tm.is_finite() || !tp.is_finite() {
            // overshoot into nonpositive temperatures; shrink toward the mean
            theta0 = 0.5 * (theta0 + 0.5 * (theta_minus_star + theta_plus_star));
            slope0 *= 0.5;
            continue;
        }
        res = [tm - theta_minus_star, tp - theta_plus_star];
        if res[0].abs().max(res[1].abs()) <= 1e-12 * scale {
            converged = true;
            break;
        }
        let d = 1e-7 * scale;
        let (tm1, tp1) = shoot(&kappa, p_star, theta0 + d, slope0, half_width, steps);
        let (tm2, tp2) = shoot(&kappa, p_star, theta0, slope0 + d / half_width, half_width, steps);
        let j = [
            [(tm1 - tm) / d, (tm2 - tm) / (d / half_width)],
            [(tp1 - tp) / d, (tp2 - tp) / (d / half_width)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        theta0 -= (j[1][1] * res[0] - j[0][1] * res[1]) / det;
        slope0 -= (-j[1][0] * res[0] + j[0][0] * res[1]) / det;
    }
    if !converged {
        return Err(VpbError::ConvergenceFailure(format!(
            "contact shooting mismatch ({:.3e}, {:.3e}) above tolerance; \
             the contact strength may be too large for the kappa model",
            res[0], res[1]
        )));
    }

    // tabulate outward from the center on the symmetric grid
    let mut eta_grid = vec![0.0; n];
    let mut theta = vec![0.0; n];
    let mut theta_prime = vec![0.0; n];
    let mid = n / 2;
    let h = half_width / steps as f64;
    for i in 0..n {
        eta_grid[i] = (i as f64 - mid as f64) * h;
    }
    theta[mid] = theta0;
    theta_prime[mid] = slope0;
    for sgn in [-1.0f64, 1.0] {
        let hs = sgn * h;
        let mut y = [theta0, a_value(&kappa, p_star, theta0) * slope0];
        let mut eta = 0.0;
        let mut idx = mid as isize;
        for _ in 0..steps {
            y = rk4_step(&kappa, p_star, eta, y, hs);
            eta += hs;
            idx += sgn as isize;
            theta[idx as usize] = y[0];
            theta_prime[idx as usize] = y[1] / a_value(&kappa, p_star, y[0]);
        }
    }

    let (c1_est, c2_est) = fit_tail_constants(&eta_grid, &theta, theta_minus_star, theta_plus_star);
    Ok(ContactProfile {
        theta_minus_star,
        theta_plus_star,
        p_star,
        u_star,
        kappa,
        eta_grid,
        theta,
        theta_prime,
        c1_est,
        c2_est,
    })
}

/// Log-linear regression of |Theta - theta_-+^*| against eta^2 on both
/// tails; returns the looser decay rate and the larger amplitude so the
/// bound holds on both sides.
fn fit_tail_constants(etas: &[f64], theta: &[f64], th_m: f64, th_p: f64) -> (f64, f64) {
    let dcd = (th_p - th_m).abs();
    if dcd == 0.0 {
        return (1.0, 1.0);
    }
    let mut fits = Vec::new();
    for (side, target) in [(-1.0f64, th_m), (1.0, th_p)] {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut m = 0usize;
        for (i, &e) in etas.iter().enumerate() {
            let d = (theta[i] - target).abs();
            if e * side > 0.5 && d > 1e-12 * dcd {
                let x = e * e;
                let y = (d / dcd).ln();
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                m += 1;
            }
        }
        if m >= 4 {
            let denom = m as f64 * sxx - sx * sx;
            let slope = (m as f64 * sxy - sx * sy) / denom;
            let intercept = (sy - slope * sx) / m as f64;
            fits.push((-slope, intercept.exp()));
        }
    }
    if fits.is_empty() {
        (1.0, 1.0)
    } else {
        let c2 = fits.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
        let c1 = fits.iter().map(|f| f.1).fold(0.0f64, f64::max);
        (c1.max(1.0), c2)
    }
}

impl ContactProfile {
    pub fn delta_cd(&self) -> f64 {
        (self.theta_plus_star - self.theta_minus_star).abs()
    }

    pub fn half_width(&self) -> f64 {
        *self.eta_grid.last().unwrap()
    }

    fn grid_step(&self) -> f64 {
        self.eta_grid[1] - self.eta_grid[0]
    }

    /// Cubic Hermite interpolation of (Theta, Theta') at eta; values beyond
    /// the table clamp to the asymptotic constants.
    pub fn theta_at(&self, eta: f64) -> (f64, f64) {
        let l = self.half_width();
        if eta <= -l {
            return (self.theta[0], 0.0);
        }
        if eta >= l {
            return (*self.theta.last().unwrap(), 0.0);
        }
        let h = self.grid_step();
        let fi = (eta - self.eta_grid[0]) / h;
        let i = (fi.floor() as usize).min(self.eta_grid.len() - 2);
        let s = fi - i as f64;
        let (t0, t1) = (self.theta[i], self.theta[i + 1]);
        let (p0, p1) = (self.theta_prime[i], self.theta_prime[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let th = (2.0 * s3 - 3.0 * s2 + 1.0) * t0
            + (s3 - 2.0 * s2 + s) * h * p0
            + (-2.0 * s3 + 3.0 * s2) * t1
            + (s3 - s2) * h * p1;
        let tp = ((6.0 * s2 - 6.0 * s) * t0 + (-6.0 * s2 + 6.0 * s) * t1) / h
            + (3.0 * s2 - 4.0 * s + 1.0) * p0
            + (3.0 * s2 - 2.0 * s) * p1;
        (th, tp)
    }

    /// Theta'' from the profile equation itself:
    /// a Theta'' = -(eta/2) Theta' - a'(Theta) Theta'^2.
    pub fn theta_second(&self, eta: f64, theta: f64, theta_prime: f64) -> f64 {
        let a = a_value(&self.kappa, self.p_star, theta);
        let ap = a_derivative(&self.kappa, self.p_star, theta);
        (-(eta / 2.0) * theta_prime - ap * theta_prime * theta_prime) / a
    }

    /// Contact-wave fields at (x, t): V = 2 Theta/(3 p*),
    /// U1 = (2 a(Theta)/(3 p*)) Theta_x + u*, Theta itself, and the time and
    /// space derivatives that follow from self-similarity.
    pub fn eval(&self, x: f64, t: f64) -> ContactPoint {
        let sq = (1.0 + t).sqrt();
        let eta = x / sq;
        let (theta, tp) = self.theta_at(eta);
        let tpp = self.theta_second(eta, theta, tp);
        let a = a_value(&self.kappa, self.p_star, theta);
        let p3 = 3.0 * self.p_star;
        let v = 2.0 * theta / p3;
        let u1 = 2.0 * a * tp / (p3 * sq) + self.u_star;
        let u1_x = -eta * tp / (p3 * (1.0 + t));
        let u1_t = tp / p3 * (1.0 + t).powf(-1.5) * (eta * eta / 2.0 - a);
        ContactPoint {
            eta,
            theta,
            theta_eta: tp,
            theta_eta_eta: tpp,
            v,
            u1,
            u1_x,
            u1_t,
            v_t: u1_x,
            theta_x: tp / sq,
            theta_xx: tpp / (1.0 + t),
            theta_t: -eta * tp / (2.0 * (1.0 + t)),
        }
    }

    /// Max-norm residual of the self-similar equation evaluated on the
    /// table with second-order differences of the flux a(Theta) Theta'.
    pub fn ode_residual_max(&self) -> f64 {
        let h = self.grid_step();
        let q: Vec<f64> = self
            .theta
            .iter()
            .zip(&self.theta_prime)
            .map(|(&t, &tp)| a_value(&self.kappa, self.p_star, t) * tp)
            .collect();
        let mut worst: f64 = 0.0;
        for i in 1..self.eta_grid.len() - 1 {
            let lhs = -(self.eta_grid[i] / 2.0) * self.theta_prime[i];
            let rhs = (q[i + 1] - q[i - 1]) / (2.0 * h);
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    }

    /// CSV rows (eta, Theta, Theta_prime).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta,Theta,Theta_prime\n");
        for i in 0..self.eta_grid.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e}\n",
                self.eta_grid[i], self.theta[i], self.theta_prime[i]
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn solve_default(th_m: f64, th_p: f64) -> ContactProfile {
        contact_selfsimilar_solve(
            th_m,
            th_p,
            2.0 / 3.0,
            0.0,
            TransportModel::hard_sphere(),
            12.0,
            4001,
        )
        .unwrap()
    }

    #[test]
    fn equal_temperatures_give_constant_profile() {
        let p = solve_default(1.0, 1.0);
        for (&t, &tp) in p.theta.iter().zip(&p.theta_prime) {
            assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(tp, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn profile_is_monotone_and_hits_boundaries() {
        let p = solve_default(0.95, 1.05);
        assert!((p.theta[0] - 0.95).abs() < 1e-6);
        assert!((p.theta.last().unwrap() - 1.05).abs() < 1e-6);
        assert!(p.theta.windows(2).all(|w| w[1] >= w[0] - 1e-14));
    }

    #[test]
    fn ode_residual_below_tolerance() {
        let p = solve_default(0.95, 1.05);
        assert!(
            p.ode_residual_max() <= 1e-6 * p.delta_cd().max(1.0),
            "residual {}",
            p.ode_residual_max()
        );
    }

    #[test]
    fn constant_pressure_and_center_value() {
        let p = solve_default(1.0, 1.0);
        let pt = p.eval(0.0, 3.0);
        assert_abs_diff_eq!(pt.v, 2.0 * 1.0 / (3.0 * p.p_star), epsilon = 1e-12);
        assert_abs_diff_eq!(pt.u1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.theta, 1.0, epsilon = 1e-12);
        // p(V^cd, Theta^cd) = p* by construction
        let p2 = solve_default(0.9, 1.1);
        for (x, t) in [(0.3, 0.0), (-2.0, 7.0), (10.0, 100.0)] {
            let c = p2.eval(x, t);
            assert_abs_diff_eq!(
                2.0 * c.theta / (3.0 * c.v),
                p2.p_star,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn chain_rule_identity_for_theta_x() {
        let p = solve_default(0.9, 1.1);
        for (x, t) in [(0.0, 0.0), (1.3, 2.0), (-4.0, 30.0), (9.0, 120.0)] {
            let c = p.eval(x, t);
            let lhs = (1.0 + t).sqrt() * c.theta_x.abs();
            assert_abs_diff_eq!(lhs, c.theta_eta.abs(), epsilon = 1e-10);
        }
    }

    #[test]
    fn tail_constants_sane() {
        let p = solve_default(0.95, 1.05);
        assert!(p.c2_est > 0.1 && p.c2_est < 2.0, "c2 = {}", p.c2_est);
        assert!(p.c1_est >= 1.0 && p.c1_est < 100.0, "c1 = {}", p.c1_est);
    }

    #[test]
    fn scaled_slope_is_time_invariant() {
        // sqrt(1+t) * sup_x |Theta_x| equals sup_eta |Theta'| at every t
        let p = solve_default(0.9, 1.1);
        let sup_eta = p
            .theta_prime
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        for t in [0.0, 10.0, 1000.0] {
            let mut sup: f64 = 0.0;
            for k in 0..4000 {
                let x = (-12.0 + 24.0 * k as f64 / 4000.0) * (1.0 + t as f64).sqrt();
                sup = sup.max(p.eval(x, t).theta_x.abs());
            }
            let scaled = (1.0 + t).sqrt() * sup;
            assert!((scaled - sup_eta).abs() <= 0.001 * sup_eta);
        }
    }
}
