//! Approximate rarefaction profiles, the composite wave (two rarefactions
//! plus a viscous contact wave), its equation residuals, the space-time
//! region decomposition and the diffusion weight.

use crate::burgers::BurgersWave;
use crate::contact::{contact_selfsimilar_solve, ContactPoint, ContactProfile};
use crate::eos::{
    self, entropy, lambda, solve_star_states, EndStates, Family, StarStates, ThermoState,
    WaveStrengths,
};
use crate::error::Result;
use crate::quad::d4;
use crate::transport::TransportModels;
use statrs::function::erf::erf;

/// Smooth fan profile of one family, transported by the Burgers solution.
#[derive(Debug, Clone)]
pub struct RarefactionWave {
    pub family: Family,
    /// Entropy of the curve (equals the entropy of the outer end state).
    pub s: f64,
    /// End state on the outer side of the fan.
    pub outer: ThermoState,
    /// Volume of the star state on the inner side.
    pub v_star: f64,
    pub burgers: BurgersWave,
    /// sqrt((5/(6 pi)) e^(s-1)), the curve constant of lambda = +- c v^(-4/3).
    curve_c: f64,
}

/// Fields and first derivatives of a fan profile at one point.
#[derive(Debug, Clone, Copy)]
pub struct RarefactionPoint {
    pub v: f64,
    pub u1: f64,
    pub theta: f64,
    pub p: f64,
    pub v_x: f64,
    pub v_t: f64,
    pub u1_x: f64,
    pub u1_t: f64,
    pub theta_x: f64,
    pub theta_t: f64,
}

impl RarefactionWave {
    /// Build the fan between the outer end state and the star volume.
    pub fn new(family: Family, outer: ThermoState, v_star: f64) -> Result<Self> {
        let s = entropy(outer.v, outer.theta)?;
        let lam_outer = lambda(outer.v, s, family)?;
        let lam_star = lambda(v_star, s, family)?;
        // 1-fan runs from the left end to the left star; its speeds increase.
        // 3-fan runs from the right star to the right end.
        let burgers = match family {
            Family::First => BurgersWave::new(lam_outer, lam_star)?,
            Family::Third => BurgersWave::new(lam_star, lam_outer)?,
        };
        let curve_c = (5.0 / (6.0 * std::f64::consts::PI) * (s - 1.0).exp()).sqrt();
        Ok(Self {
            family,
            s,
            outer,
            v_star,
            burgers,
            curve_c,
        })
    }

    /// Closed form of int lambda d eta along the curve (lambda = +- c v^(-4/3)).
    fn curve_integral(&self, a: f64, b: f64) -> f64 {
        self.family.sign() * 3.0 * self.curve_c * (a.powf(-1.0 / 3.0) - b.powf(-1.0 / 3.0))
    }

    /// Profile fields from the transported speed w: V solves lambda(V, s) = w.
    pub fn eval(&self, x: f64, t: f64) -> RarefactionPoint {
        let (w, wx) = self.burgers.w_and_wx(x, t);
        if self.burgers.w_l == self.burgers.w_r {
            // degenerate fan: constant state
            return RarefactionPoint {
                v: self.outer.v,
                u1: self.outer.u[0],
                theta: self.outer.theta,
                p: self.outer.pressure(),
                v_x: 0.0,
                v_t: 0.0,
                u1_x: 0.0,
                u1_t: 0.0,
                theta_x: 0.0,
                theta_t: 0.0,
            };
        }
        let v = (self.curve_c * self.curve_c / (w * w)).powf(3.0 / 8.0);
        let u1 = self.outer.u[0] - self.curve_integral(self.outer.v, v);
        let theta = self.outer.theta * (self.outer.v / v).powf(2.0 / 3.0);
        let p = 2.0 * theta / (3.0 * v);
        // V is proportional to |w|^(-3/4); w_t = -w w_x by the Burgers equation
        let v_x = -0.75 * v / w * wx;
        let v_t = 0.75 * v * wx;
        let u1_x = -w * v_x;
        let u1_t = -w * v_t;
        let theta_x = -(2.0 / 3.0) * theta / v * v_x;
        let theta_t = -(2.0 / 3.0) * theta / v * v_t;
        RarefactionPoint {
            v,
            u1,
            theta,
            p,
            v_x,
            v_t,
            u1_x,
            u1_t,
            theta_x,
            theta_t,
        }
    }
}

/// Assembled superposition ansatz.
#[derive(Debug, Clone)]
pub struct CompositeWave {
    pub ends: EndStates,
    pub stars: StarStates,
    pub rare_minus: RarefactionWave,
    pub rare_plus: RarefactionWave,
    pub contact: ContactProfile,
    pub transport: TransportModels,
    pub strengths: WaveStrengths,
}

/// Build options for the contact table.
#[derive(Debug, Clone, Copy)]
pub struct ContactGrid {
    pub half_width: f64,
    pub n: usize,
}

impl Default for ContactGrid {
    fn default() -> Self {
        Self {
            half_width: 12.0,
            n: 4001,
        }
    }
}

/// Mass / momentum / transverse / energy residuals of the composite wave
/// under the wave-pattern equations it satisfies up to the contact
/// remainders. The transverse component is identically zero.
#[derive(Debug, Clone, Copy)]
pub struct ResidualVector {
    pub mass: f64,
    pub momentum: f64,
    pub transverse: f64,
    pub energy: f64,
}

/// Space-time region with respect to the fan speeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    OmegaMinus,
    OmegaC,
    OmegaPlus,
}

impl CompositeWave {
    pub fn build(
        ends: EndStates,
        transport: TransportModels,
        grid: ContactGrid,
        star_tol: f64,
    ) -> Result<Self> {
        let stars = solve_star_states(&ends, star_tol)?;
        Self::from_parts(ends, stars, transport, grid)
    }

    pub fn from_parts(
        ends: EndStates,
        stars: StarStates,
        transport: TransportModels,
        grid: ContactGrid,
    ) -> Result<Self> {
        let rare_minus = RarefactionWave::new(Family::First, ends.left, stars.v_minus_star)?;
        let rare_plus = RarefactionWave::new(Family::Third, ends.right, stars.v_plus_star)?;
        let contact = contact_selfsimilar_solve(
            stars.theta_minus_star,
            stars.theta_plus_star,
            stars.p_star,
            stars.u_star,
            transport.kappa,
            grid.half_width,
            grid.n,
        )?;
        let strengths = eos::wave_strengths(&stars, &ends)?;
        Ok(Self {
            ends,
            stars,
            rare_minus,
            rare_plus,
            contact,
            transport,
            strengths,
        })
    }

    /// The three profile evaluations behind the ansatz.
    pub fn parts(&self, x: f64, t: f64) -> (ContactPoint, RarefactionPoint, RarefactionPoint) {
        (
            self.contact.eval(x, t),
            self.rare_minus.eval(x, t),
            self.rare_plus.eval(x, t),
        )
    }

    /// (v, u1, theta) of the superposition at (x, t):
    /// componentwise sum minus the duplicated star constants.
    pub fn eval(&self, x: f64, t: f64) -> ThermoState {
        let (c, rm, rp) = self.parts(x, t);
        let v = c.v + rm.v + rp.v - self.stars.v_minus_star - self.stars.v_plus_star;
        let u1 = c.u1 + rm.u1 + rp.u1 - 2.0 * self.stars.u_star;
        let theta =
            c.theta + rm.theta + rp.theta - self.stars.theta_minus_star - self.stars.theta_plus_star;
        ThermoState {
            v,
            u: [u1, 0.0, 0.0],
            theta,
        }
    }

    fn u_bar(&self, x: f64, t: f64) -> f64 {
        let (c, rm, rp) = self.parts(x, t);
        c.u1 + rm.u1 + rp.u1 - 2.0 * self.stars.u_star
    }

    fn rare_pressure_sum(&self, x: f64, t: f64) -> f64 {
        self.rare_minus.eval(x, t).p + self.rare_plus.eval(x, t).p
    }

    fn contact_momentum_flux(&self, x: f64, t: f64) -> f64 {
        let c = self.contact.eval(x, t);
        self.transport.mu.value(c.theta) * c.u1_x / c.v
    }

    fn contact_heat_flux(&self, x: f64, t: f64) -> f64 {
        let c = self.contact.eval(x, t);
        self.transport.kappa.value(c.theta) * c.theta_x / c.v
    }

    /// Equation residuals at (x, t). Time derivatives are analytic from the
    /// self-similar and characteristic forms; the flux divergences use
    /// fourth-order centered differences with step `fd_step`.
    pub fn residuals(&self, x: f64, t: f64, fd_step: f64) -> ResidualVector {
        let (c, rm, rp) = self.parts(x, t);
        let st = self.eval(x, t);
        let p_bar = st.pressure();

        let v_t = c.v_t + rm.v_t + rp.v_t;
        let mass = v_t - d4(|xx| self.u_bar(xx, t), x, fd_step);

        let u1_t = c.u1_t + rm.u1_t + rp.u1_t;
        let momentum = u1_t + d4(|xx| self.rare_pressure_sum(xx, t), x, fd_step)
            - 4.0 / 3.0 * d4(|xx| self.contact_momentum_flux(xx, t), x, fd_step);

        let theta_t = c.theta_t + rm.theta_t + rp.theta_t;
        let u_bar_x = c.u1_x + rm.u1_x + rp.u1_x;
        let mu_cd = self.transport.mu.value(c.theta);
        let energy = theta_t + p_bar * u_bar_x
            - (p_bar - self.stars.p_star) * c.u1_x
            - (p_bar - rm.p) * rm.u1_x
            - (p_bar - rp.p) * rp.u1_x
            - d4(|xx| self.contact_heat_flux(xx, t), x, fd_step)
            - 4.0 * mu_cd / (3.0 * c.v) * c.u1_x * c.u1_x;

        ResidualVector {
            mass,
            momentum,
            transverse: 0.0,
            energy,
        }
    }

    /// Max over a sampling grid of one residual component at time t. The
    /// grid covers the diffusive core and both fans.
    pub fn max_residual(&self, t: f64, fd_step: f64) -> ResidualVector {
        let sq = (1.0 + t).sqrt();
        let mut xs: Vec<f64> = Vec::new();
        let core = 15.0 * sq;
        for k in 0..=600 {
            xs.push(-core + 2.0 * core * k as f64 / 600.0);
        }
        let lo = self.rare_minus.burgers.w_l * t - 30.0;
        let hi = self.rare_plus.burgers.w_r * t + 30.0;
        for k in 0..=400 {
            xs.push(lo + (hi - lo) * k as f64 / 400.0);
        }
        let mut out = ResidualVector {
            mass: 0.0,
            momentum: 0.0,
            transverse: 0.0,
            energy: 0.0,
        };
        for &x in &xs {
            let r = self.residuals(x, t, fd_step);
            out.mass = out.mass.max(r.mass.abs());
            out.momentum = out.momentum.max(r.momentum.abs());
            out.energy = out.energy.max(r.energy.abs());
        }
        out
    }

    /// Region decomposition Omega_-+ / Omega_c with the closed band
    /// containing its boundary.
    pub fn region_classify(&self, x: f64, t: f64) -> Region {
        region_classify(&self.stars, &self.ends, x, t)
    }

    /// Decay rate c0 entering the exponential bounds in Omega_c.
    pub fn c0_constant(&self) -> Result<f64> {
        c0_constant(&self.stars, &self.ends, self.contact.c1_est)
    }
}

/// Omega_- = { 2x < lambda_-(v_-^*) t }, Omega_+ = { 2x > lambda_+(v_+^*) t },
/// Omega_c the closed band in between.
pub fn region_classify(stars: &StarStates, ends: &EndStates, x: f64, t: f64) -> Region {
    let s_minus = entropy(ends.left.v, ends.left.theta).unwrap_or(f64::NAN);
    let s_plus = entropy(ends.right.v, ends.right.theta).unwrap_or(f64::NAN);
    let lam_m = lambda(stars.v_minus_star, s_minus, Family::First).unwrap_or(f64::NAN);
    let lam_p = lambda(stars.v_plus_star, s_plus, Family::Third).unwrap_or(f64::NAN);
    if 2.0 * x < lam_m * t {
        Region::OmegaMinus
    } else if 2.0 * x > lam_p * t {
        Region::OmegaPlus
    } else {
        Region::OmegaC
    }
}

/// c0 = (1/10) min(|lambda_-^*|, lambda_+^*, c1 lambda_-^*2, c1 lambda_+^*2, 1).
pub fn c0_constant(stars: &StarStates, ends: &EndStates, c1_est: f64) -> Result<f64> {
    let s_minus = entropy(ends.left.v, ends.left.theta)?;
    let s_plus = entropy(ends.right.v, ends.right.theta)?;
    let lam_m = lambda(stars.v_minus_star, s_minus, Family::First)?;
    let lam_p = lambda(stars.v_plus_star, s_plus, Family::Third)?;
    let c0 = (lam_m.abs())
        .min(lam_p)
        .min(c1_est * lam_m * lam_m)
        .min(c1_est * lam_p * lam_p)
        .min(1.0);
    Ok(c0 / 10.0)
}

/// Diffusion weight w_hat = (1+t)^(-1/2) exp(-alpha x^2 / (1+t)).
pub fn weight_hat_w(x: f64, t: f64, alpha: f64) -> f64 {
    (1.0 + t).powf(-0.5) * (-alpha * x * x / (1.0 + t)).exp()
}

/// Companion primitive g(x, t) = int_{-inf}^x w_hat dy, in closed form.
pub fn weight_g(x: f64, t: f64, alpha: f64) -> f64 {
    0.5 * (std::f64::consts::PI / alpha).sqrt() * (1.0 + erf(x * (alpha / (1.0 + t)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::construct_end_states;
    use crate::quad::integrate;
    use approx::assert_abs_diff_eq;

    fn demo_wave() -> CompositeWave {
        let left = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let (ends, stars) = construct_end_states(left, 0.08, 0.07, 0.06).unwrap();
        CompositeWave::from_parts(
            ends,
            stars,
            TransportModels::default(),
            ContactGrid::default(),
        )
        .unwrap()
    }

    fn zero_wave() -> CompositeWave {
        let st = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let ends = EndStates {
            left: st,
            right: st,
        };
        CompositeWave::build(
            ends,
            TransportModels::default(),
            ContactGrid::default(),
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn rarefaction_limits_and_entropy() {
        let w = demo_wave();
        // far left of the 1-fan: left end state
        let p = w.rare_minus.eval(-1e4, 7.0);
        assert_abs_diff_eq!(p.v, w.ends.left.v, epsilon = 1e-10);
        assert_abs_diff_eq!(p.u1, w.ends.left.u[0], epsilon = 1e-10);
        // entropy of the returned state stays on the curve
        for x in [-30.0, -5.0, 0.0, 4.0] {
            let p = w.rare_minus.eval(x, 9.0);
            let s = entropy(p.v, p.theta).unwrap();
            assert_abs_diff_eq!(s, w.rare_minus.s, epsilon = 1e-10);
        }
    }

    #[test]
    fn rarefaction_defining_identity() {
        let w = demo_wave();
        for (x, t) in [(-8.0, 3.0), (-2.0, 11.0), (3.0, 40.0)] {
            let p = w.rare_minus.eval(x, t);
            let lam = lambda(p.v, w.rare_minus.s, Family::First).unwrap();
            let wval = w.rare_minus.burgers.w(x, t);
            assert_abs_diff_eq!(lam, wval, epsilon = 1e-10);
        }
    }

    #[test]
    fn rarefaction_curve_velocity_matches_quadrature_op() {
        let w = demo_wave();
        let p = w.rare_minus.eval(-1.0, 5.0);
        let u_quad = eos::rarefaction_u(
            w.ends.left.v,
            w.ends.left.u[0],
            p.v,
            w.rare_minus.s,
            Family::First,
        )
        .unwrap();
        assert_abs_diff_eq!(p.u1, u_quad, epsilon = 1e-10);
    }

    #[test]
    fn zero_strength_composite_is_constant() {
        let w = zero_wave();
        for (x, t) in [(0.0, 0.0), (3.0, 2.0), (-40.0, 111.0)] {
            let st = w.eval(x, t);
            assert_abs_diff_eq!(st.v, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(st.u[0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(st.theta, 1.0, epsilon = 1e-12);
            let r = w.residuals(x, t, 1e-3);
            assert!(r.mass.abs() < 1e-10);
            assert!(r.momentum.abs() < 1e-10);
            assert!(r.energy.abs() < 1e-10);
        }
    }

    #[test]
    fn composite_far_field() {
        let w = demo_wave();
        for t in [0.0, 10.0, 1000.0] {
            let x = 50.0 * (1.0 + t);
            let st = w.eval(x, t);
            assert!((st.v - w.ends.right.v).abs() < 1e-8);
            assert!((st.u[0] - w.ends.right.u[0]).abs() < 1e-8);
            assert!((st.theta - w.ends.right.theta).abs() < 1e-8);
            let st = w.eval(-x, t);
            assert!((st.v - w.ends.left.v).abs() < 1e-8);
        }
    }

    #[test]
    fn composite_matches_componentwise_sum() {
        let w = demo_wave();
        for k in 0..40 {
            let x = -20.0 + k as f64;
            let (c, rm, rp) = w.parts(x, 0.0);
            let st = w.eval(x, 0.0);
            let v = c.v + rm.v + rp.v - w.stars.v_minus_star - w.stars.v_plus_star;
            assert_abs_diff_eq!(st.v, v, epsilon = 1e-14);
            assert!(st.v > 0.0 && st.theta > 0.0);
        }
    }

    #[test]
    fn mass_residual_is_discretization_level() {
        let w = demo_wave();
        for (x, t) in [(0.5, 10.0), (-7.0, 25.0), (12.0, 50.0)] {
            let r = w.residuals(x, t, 1e-3);
            assert!(r.mass.abs() < 1e-8, "mass residual {}", r.mass);
            assert_abs_diff_eq!(r.transverse, 0.0);
        }
    }

    #[test]
    fn region_classification() {
        let w = demo_wave();
        assert_eq!(w.region_classify(1.0, 0.0), Region::OmegaPlus);
        assert_eq!(w.region_classify(-1.0, 0.0), Region::OmegaMinus);
        assert_eq!(w.region_classify(0.0, 0.0), Region::OmegaC);
        // boundary points belong to the closed band
        let s_plus = entropy(w.ends.right.v, w.ends.right.theta).unwrap();
        let lam_p = lambda(w.stars.v_plus_star, s_plus, Family::Third).unwrap();
        let t = 8.0;
        assert_eq!(w.region_classify(lam_p * t / 2.0, t), Region::OmegaC);
        assert_eq!(
            w.region_classify(lam_p * t / 2.0 + 1e-9, t),
            Region::OmegaPlus
        );
    }

    #[test]
    fn c0_attains_the_stated_minimum() {
        let mut stars = StarStates {
            v_minus_star: 1.0,
            v_plus_star: 1.0,
            u_star: 0.0,
            theta_minus_star: 0.9,
            theta_plus_star: 0.9,
            p_star: 0.6,
        };
        // pick end states whose eigenvalues at the stars are exactly -+1
        let theta = 9.0 / 10.0; // sqrt(10 theta / 9) = 1 at v = 1
        let st = ThermoState::new(1.0, 0.0, theta).unwrap();
        let ends = EndStates {
            left: st,
            right: st,
        };
        stars.theta_minus_star = theta;
        stars.theta_plus_star = theta;
        let c0 = c0_constant(&stars, &ends, 2.0).unwrap();
        assert_abs_diff_eq!(c0, 0.1, epsilon = 1e-12);
        // halving |lambda| halves c0 while c1 lambda^2 stays larger
        let st2 = ThermoState::new(2.0, 0.0, theta).unwrap();
        let ends2 = EndStates {
            left: st2,
            right: st2,
        };
        let stars2 = StarStates {
            v_minus_star: 2.0,
            v_plus_star: 2.0,
            u_star: 0.0,
            theta_minus_star: theta,
            theta_plus_star: theta,
            p_star: 0.3,
        };
        let c0_half = c0_constant(&stars2, &ends2, 8.0).unwrap();
        assert_abs_diff_eq!(c0_half, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn weight_normalization() {
        assert_abs_diff_eq!(weight_hat_w(0.0, 0.0, 0.25), 1.0, epsilon = 1e-15);
        for (t, alpha) in [(0.0, 0.25), (7.0, 0.1), (100.0, 0.5)] {
            let total = (std::f64::consts::PI / alpha).sqrt();
            // quadrature oracle for g(+inf, t); bound chosen so the
            // integrand is resolved from the first interval split
            let bound = 40.0 * ((1.0 + t) / alpha).sqrt();
            let q = integrate(|x| weight_hat_w(x, t, alpha), -bound, bound, 1e-12);
            assert_abs_diff_eq!(q, total, epsilon = 1e-10);
            assert_abs_diff_eq!(weight_g(bound, t, alpha), total, epsilon = 1e-10);
            // the closed form tracks the quadrature at a finite point
            let part = integrate(|x| weight_hat_w(x, t, alpha), -bound, 1.3, 1e-12);
            assert_abs_diff_eq!(weight_g(1.3, t, alpha), part, epsilon = 1e-9);
        }
    }
}
