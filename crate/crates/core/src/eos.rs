//! Equation of state, entropy/eigenvalue formulas, rarefaction curves and
//! the star-state solver for the R1-CD2-R3 Riemann pattern in Lagrangian
//! variables (v, u, theta) with the gas constant renormalized to R = 2/3,
//! so that e = theta and p = 2*theta/(3*v).

use crate::error::{Result, VpbError};
use crate::quad;

/// Renormalized gas constant.
pub const R_GAS: f64 = 2.0 / 3.0;

/// Fluid triple in Lagrangian variables. Only u[0] is nonzero in the wave
/// constructions; the transverse components are carried for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoState {
    pub v: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

impl ThermoState {
    pub fn new(v: f64, u1: f64, theta: f64) -> Result<Self> {
        if !(v > 0.0) || !(theta > 0.0) || !v.is_finite() || !theta.is_finite() {
            return Err(VpbError::Domain(format!(
                "state requires v > 0 and theta > 0, got v = {v}, theta = {theta}"
            )));
        }
        Ok(Self {
            v,
            u: [u1, 0.0, 0.0],
            theta,
        })
    }

    pub fn pressure(&self) -> f64 {
        2.0 * self.theta / (3.0 * self.v)
    }
}

/// Pair of far-field states to be connected by the wave pattern.
#[derive(Debug, Clone, Copy)]
pub struct EndStates {
    pub left: ThermoState,
    pub right: ThermoState,
}

/// Intermediate constant states of the pattern: equal pressure and common
/// velocity across the contact.
#[derive(Debug, Clone, Copy)]
pub struct StarStates {
    pub v_minus_star: f64,
    pub v_plus_star: f64,
    pub u_star: f64,
    pub theta_minus_star: f64,
    pub theta_plus_star: f64,
    pub p_star: f64,
}

/// Characteristic family of a rarefaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// 1-family, lambda < 0.
    First,
    /// 3-family, lambda > 0.
    Third,
}

impl Family {
    pub fn sign(self) -> f64 {
        match self {
            Family::First => -1.0,
            Family::Third => 1.0,
        }
    }
}

fn check_vtheta(v: f64, theta: f64) -> Result<()> {
    if !(v > 0.0) || !(theta > 0.0) {
        return Err(VpbError::Domain(format!(
            "requires v > 0 and theta > 0, got v = {v}, theta = {theta}"
        )));
    }
    Ok(())
}

/// p = 2*theta / (3*v).
pub fn pressure(v: f64, theta: f64) -> Result<f64> {
    check_vtheta(v, theta)?;
    Ok(2.0 * theta / (3.0 * v))
}

/// s = (2/3) ln v + ln((4 pi / 3) theta) + 1.
pub fn entropy(v: f64, theta: f64) -> Result<f64> {
    check_vtheta(v, theta)?;
    Ok(2.0 / 3.0 * v.ln() + (4.0 * std::f64::consts::PI / 3.0 * theta).ln() + 1.0)
}

/// Inverse of `entropy` in theta: theta = (3/(4 pi)) e^(s-1) v^(-2/3).
pub fn theta_from_vs(v: f64, s: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(VpbError::Domain(format!("requires v > 0, got v = {v}")));
    }
    Ok(3.0 / (4.0 * std::f64::consts::PI) * (s - 1.0).exp() * v.powf(-2.0 / 3.0))
}

/// Acoustic eigenvalue lambda_{+-}(v, s) = +- sqrt((5/(6 pi)) v^(-8/3) e^(s-1)).
///
/// The shift by one in the exponent pairs with the normalization of
/// `entropy`, so that lambda(v, entropy(v, theta)) equals the sound speed
/// sqrt(10 theta / 9) / v of the isentrope through (v, theta).
pub fn lambda(v: f64, s: f64, family: Family) -> Result<f64> {
    if !(v > 0.0) {
        return Err(VpbError::Domain(format!("requires v > 0, got v = {v}")));
    }
    let radicand = 5.0 / (6.0 * std::f64::consts::PI) * v.powf(-8.0 / 3.0) * (s - 1.0).exp();
    Ok(family.sign() * radicand.sqrt())
}

/// Eigenvalue straight from the state: +- sqrt(10 theta / 9) / v.
pub fn lambda_state(v: f64, theta: f64, family: Family) -> Result<f64> {
    check_vtheta(v, theta)?;
    Ok(family.sign() * (10.0 * theta / 9.0).sqrt() / v)
}

/// Volume on the fan where lambda(v, s) equals the transported speed w.
pub fn fan_volume(w: f64, s: f64) -> Result<f64> {
    if w == 0.0 {
        return Err(VpbError::Domain(
            "fan speed crosses zero; pattern not admissible".into(),
        ));
    }
    let c = 5.0 / (6.0 * std::f64::consts::PI) * (s - 1.0).exp();
    Ok((c / (w * w)).powf(3.0 / 8.0))
}

/// Rarefaction-curve velocity u = u_start - int_{v_start}^{v_end} lambda(eta, s) d eta,
/// by adaptive quadrature with absolute tolerance 1e-10.
pub fn rarefaction_u(v_start: f64, u_start: f64, v_end: f64, s: f64, family: Family) -> Result<f64> {
    if !(v_start > 0.0) {
        return Err(VpbError::Domain(format!("requires v_start > 0, got {v_start}")));
    }
    if v_end < v_start {
        return Err(VpbError::Domain(format!(
            "curve defined for v_end >= v_start, got v_end = {v_end} < v_start = {v_start}"
        )));
    }
    let integral = quad::integrate(
        |eta| lambda(eta, s, family).unwrap_or(f64::NAN),
        v_start,
        v_end,
        1e-10,
    );
    Ok(u_start - integral)
}

/// Wave strengths of a solved pattern.
#[derive(Debug, Clone, Copy)]
pub struct WaveStrengths {
    /// Speed span of the 1-fan.
    pub rare_minus: f64,
    /// Contact temperature jump |theta_+^* - theta_-^*|.
    pub contact: f64,
    /// Speed span of the 3-fan.
    pub rare_plus: f64,
    /// |(v_+ - v_-, u_+ - u_-, theta_+ - theta_-)|.
    pub total: f64,
}

pub fn wave_strengths(stars: &StarStates, ends: &EndStates) -> Result<WaveStrengths> {
    let (l, r) = (&ends.left, &ends.right);
    let s_minus = entropy(l.v, l.theta)?;
    let s_plus = entropy(r.v, r.theta)?;
    let rare_minus = lambda(stars.v_minus_star, s_minus, Family::First)?
        - lambda(l.v, s_minus, Family::First)?;
    let rare_plus =
        lambda(r.v, s_plus, Family::Third)? - lambda(stars.v_plus_star, s_plus, Family::Third)?;
    let dv = r.v - l.v;
    let du = r.u[0] - l.u[0];
    let dth = r.theta - l.theta;
    Ok(WaveStrengths {
        rare_minus,
        contact: (stars.theta_plus_star - stars.theta_minus_star).abs(),
        rare_plus,
        total: (dv * dv + du * du + dth * dth).sqrt(),
    })
}

struct CurveData {
    s_minus: f64,
    s_plus: f64,
    /// v_+^* / v_-^* along the pressure-equality curve, constant in v_-^*.
    volume_ratio: f64,
}

impl CurveData {
    fn new(ends: &EndStates) -> Result<Self> {
        let s_minus = entropy(ends.left.v, ends.left.theta)?;
        let s_plus = entropy(ends.right.v, ends.right.theta)?;
        // p(v, s) is proportional to e^(s-1) v^(-5/3); equal pressures pin the ratio.
        let volume_ratio = (0.6 * (s_plus - s_minus)).exp();
        Ok(Self {
            s_minus,
            s_plus,
            volume_ratio,
        })
    }

    /// u* mismatch between the two curves as a function of v_-^*.
    fn residual(&self, ends: &EndStates, vm: f64, vp: f64) -> Result<(f64, f64)> {
        let u_left = rarefaction_u(ends.left.v, ends.left.u[0], vm, self.s_minus, Family::First)?;
        let u_right = rarefaction_u(ends.right.v, ends.right.u[0], vp, self.s_plus, Family::Third)?;
        let p_left = pressure(vm, theta_from_vs(vm, self.s_minus)?)?;
        let p_right = pressure(vp, theta_from_vs(vp, self.s_plus)?)?;
        Ok((u_left - u_right, p_left - p_right))
    }
}

fn stars_from(vm: f64, vp: f64, ends: &EndStates, cd: &CurveData) -> Result<StarStates> {
    let theta_minus_star = theta_from_vs(vm, cd.s_minus)?;
    let theta_plus_star = theta_from_vs(vp, cd.s_plus)?;
    let u_star = rarefaction_u(ends.left.v, ends.left.u[0], vm, cd.s_minus, Family::First)?;
    Ok(StarStates {
        v_minus_star: vm,
        v_plus_star: vp,
        u_star,
        theta_minus_star,
        theta_plus_star,
        p_star: pressure(vm, theta_minus_star)?,
    })
}

const NEWTON_BUDGET: usize = 100;
const BISECTION_BUDGET: usize = 200;

/// Solve for the intermediate states of the R1-CD2-R3 pattern.
///
/// Unknowns are (v_-^*, v_+^*) on the two rarefaction curves; u* and
/// theta_-+^* are derived. Damped Newton with analytic Jacobian, falling
/// back to bisection on v_-^* with v_+^* eliminated through pressure
/// equality (the eliminated mismatch is strictly monotone).
pub fn solve_star_states(ends: &EndStates, tol: f64) -> Result<StarStates> {
    if !(tol > 0.0) {
        return Err(VpbError::Domain(format!("tol must be positive, got {tol}")));
    }
    let cd = CurveData::new(ends)?;
    let (vl, vr) = (ends.left.v, ends.right.v);

    let mut vm = vl.max(vr / cd.volume_ratio);
    let mut vp = vm * cd.volume_ratio;
    let mut newton_ok = false;
    let (mut fu, mut fp) = cd.residual(ends, vm, vp)?;
    for _ in 0..NEWTON_BUDGET {
        if fu.abs() <= tol && fp.abs() <= tol {
            newton_ok = true;
            break;
        }
        // d u_left / d vm = -lambda_-(vm), d u_right / d vp = -lambda_+(vp),
        // d p / d v = -(5/3) p / v along an isentrope.
        let lam_m = lambda(vm, cd.s_minus, Family::First)?;
        let lam_p = lambda(vp, cd.s_plus, Family::Third)?;
        let p_m = pressure(vm, theta_from_vs(vm, cd.s_minus)?)?;
        let p_p = pressure(vp, theta_from_vs(vp, cd.s_plus)?)?;
        let j00 = -lam_m;
        let j01 = lam_p;
        let j10 = -(5.0 / 3.0) * p_m / vm;
        let j11 = (5.0 / 3.0) * p_p / vp;
        let det = j00 * j11 - j01 * j10;
        if det.abs() < 1e-300 {
            break;
        }
        let dvm = -(j11 * fu - j01 * fp) / det;
        let dvp = -(-j10 * fu + j00 * fp) / det;
        // damped update, clamped to the curve domains
        let norm0 = fu.abs() + fp.abs();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let vm_try = (vm + alpha * dvm).max(vl);
            let vp_try = (vp + alpha * dvp).max(vr);
            let (fu_try, fp_try) = cd.residual(ends, vm_try, vp_try)?;
            if fu_try.abs() + fp_try.abs() < norm0 {
                vm = vm_try;
                vp = vp_try;
                fu = fu_try;
                fp = fp_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if newton_ok || (fu.abs() <= tol && fp.abs() <= tol) {
        return stars_from(vm, vp, ends, &cd);
    }

    // Bisection fallback on the eliminated one-dimensional mismatch
    // G(vm) = u_left(vm) - u_right(vm * ratio); G is strictly increasing.
    let g = |vm: f64| -> Result<f64> {
        let (fu, _) = cd.residual(ends, vm, vm * cd.volume_ratio)?;
        Ok(fu)
    };
    let lo = vl.max(vr / cd.volume_ratio);
    let g_lo = g(lo)?;
    if g_lo > tol {
        return Err(VpbError::NoSolution(format!(
            "mismatch at the curve-domain boundary is {g_lo:.3e} > 0; \
             end states outside the admissible R1-CD2-R3 region"
        )));
    }
    let mut hi = lo.max(1.0) * 2.0;
    let mut iters = 0usize;
    while g(hi)? < 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 60 {
            return Err(VpbError::NoSolution(
                "no bracketing volume found for the star-state mismatch".into(),
            ));
        }
    }
    let mut lo = lo;
    for _ in 0..BISECTION_BUDGET {
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    let vm = 0.5 * (lo + hi);
    let vp = vm * cd.volume_ratio;
    let (fu, fp) = cd.residual(ends, vm, vp)?;
    if fu.abs() <= tol && fp.abs() <= tol {
        stars_from(vm, vp, ends, &cd)
    } else {
        Err(VpbError::NoSolution(format!(
            "star-state iteration exhausted its budget with residuals ({fu:.3e}, {fp:.3e})"
        )))
    }
}

/// Evaluate the inviscid Riemann fan at xi = x/t.
///
/// Piecewise: left state / 1-fan / left star / contact at xi = 0 / right
/// star / 3-fan / right state. xi = 0 is resolved to the right-star side.
pub fn riemann_fan_eval(stars: &StarStates, ends: &EndStates, xi: f64) -> Result<ThermoState> {
    let (l, r) = (&ends.left, &ends.right);
    let s_minus = entropy(l.v, l.theta)?;
    let s_plus = entropy(r.v, r.theta)?;
    let lam_l = lambda(l.v, s_minus, Family::First)?;
    let lam_ls = lambda(stars.v_minus_star, s_minus, Family::First)?;
    let lam_rs = lambda(stars.v_plus_star, s_plus, Family::Third)?;
    let lam_r = lambda(r.v, s_plus, Family::Third)?;

    if xi <= lam_l {
        return Ok(*l);
    }
    if xi < lam_ls {
        let v = fan_volume(xi, s_minus)?;
        let u = rarefaction_u(l.v, l.u[0], v, s_minus, Family::First)?;
        return ThermoState::new(v, u, theta_from_vs(v, s_minus)?);
    }
    if xi < 0.0 {
        return ThermoState::new(
            stars.v_minus_star,
            stars.u_star,
            stars.theta_minus_star,
        );
    }
    if xi <= lam_rs {
        return ThermoState::new(stars.v_plus_star, stars.u_star, stars.theta_plus_star);
    }
    if xi < lam_r {
        let v = fan_volume(xi, s_plus)?;
        let u = rarefaction_u(r.v, r.u[0], v, s_plus, Family::Third)?;
        return ThermoState::new(v, u, theta_from_vs(v, s_plus)?);
    }
    Ok(*r)
}

/// Forward construction of admissible end states from the left state and
/// three strength parameters: v_-^* = v_- (1 + dv_minus), a contact jump
/// theta_+^* = theta_-^* (1 + contact_jump), and v_+ = v_+^* / (1 + dv_plus).
/// Returns the right end state together with the star states it encodes.
pub fn construct_end_states(
    left: ThermoState,
    dv_minus: f64,
    contact_jump: f64,
    dv_plus: f64,
) -> Result<(EndStates, StarStates)> {
    if dv_minus < 0.0 || dv_plus < 0.0 {
        return Err(VpbError::Domain(
            "rarefaction strengths dv_minus and dv_plus must be nonnegative".into(),
        ));
    }
    let s_minus = entropy(left.v, left.theta)?;
    let vm = left.v * (1.0 + dv_minus);
    let theta_minus_star = theta_from_vs(vm, s_minus)?;
    let u_star = rarefaction_u(left.v, left.u[0], vm, s_minus, Family::First)?;
    let p_star = pressure(vm, theta_minus_star)?;
    let theta_plus_star = theta_minus_star * (1.0 + contact_jump);
    if !(theta_plus_star > 0.0) {
        return Err(VpbError::Domain("contact jump drives theta negative".into()));
    }
    let vp = 2.0 * theta_plus_star / (3.0 * p_star);
    let s_plus = entropy(vp, theta_plus_star)?;
    let v_right = vp / (1.0 + dv_plus);
    let theta_right = theta_from_vs(v_right, s_plus)?;
    // walk the 3-curve from the star state back to the right end
    let du = quad::integrate(
        |eta| lambda(eta, s_plus, Family::Third).unwrap_or(f64::NAN),
        v_right,
        vp,
        1e-12,
    );
    let u_right = u_star + du;
    let ends = EndStates {
        left,
        right: ThermoState::new(v_right, u_right, theta_right)?,
    };
    let stars = StarStates {
        v_minus_star: vm,
        v_plus_star: vp,
        u_star,
        theta_minus_star,
        theta_plus_star,
        p_star,
    };
    Ok((ends, stars))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn pressure_values() {
        assert_abs_diff_eq!(pressure(1.0, 1.0).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pressure(2.0, 3.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(pressure(1.0, 0.0).is_err());
        assert!(pressure(-1.0, 1.0).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_abs_diff_eq!(entropy(1.0, 3.0 / (4.0 * PI)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            entropy((1.5f64).exp(), 3.0 / (4.0 * PI)).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert!(entropy(0.0, 1.0).is_err());
    }

    #[test]
    fn lambda_normalization_and_sign() {
        // with s = 1 + ln(6 pi / 5) the radicand reduces to one at v = 1
        let s = 1.0 + (6.0 * PI / 5.0).ln();
        assert_abs_diff_eq!(lambda(1.0, s, Family::Third).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lambda(1.0, s, Family::First).unwrap(), -1.0, epsilon = 1e-14);
        // |lambda| strictly decreasing in v
        assert!(lambda(2.0, s, Family::Third).unwrap() < lambda(1.0, s, Family::Third).unwrap());
        assert!(lambda(0.0, s, Family::Third).is_err());
    }

    #[test]
    fn lambda_matches_state_form() {
        for (v, th) in [(1.0, 1.0), (0.7, 2.3), (1.9, 0.4)] {
            let s = entropy(v, th).unwrap();
            assert_abs_diff_eq!(
                lambda(v, s, Family::Third).unwrap(),
                lambda_state(v, th, Family::Third).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    proptest! {
        #[test]
        fn entropy_theta_roundtrip(v in 0.5f64..2.0, th in 0.5f64..2.0) {
            let s = entropy(v, th).unwrap();
            let back = theta_from_vs(v, s).unwrap();
            prop_assert!((back - th).abs() < 1e-12);
        }
    }

    #[test]
    fn rarefaction_u_trivial_and_monotone() {
        let s = entropy(1.0, 1.0).unwrap();
        let u = rarefaction_u(1.0, 0.3, 1.0, s, Family::First).unwrap();
        assert_abs_diff_eq!(u, 0.3, epsilon = 1e-15);
        // -int lambda_- > 0, so u grows along the 1-curve
        let u2 = rarefaction_u(1.0, 0.3, 2.0, s, Family::First).unwrap();
        assert!(u2 > 0.3);
        assert!(rarefaction_u(1.0, 0.0, 0.5, s, Family::First).is_err());
    }

    #[test]
    fn rarefaction_u_against_fixed_step_oracle() {
        // independent fixed-step trapezoid refinement at 1e6 points
        let s = 1.0 + (6.0 * PI / 5.0).ln();
        let n = 1_000_000usize;
        let (a, b) = (1.0, 2.0);
        let h = (b - a) / n as f64;
        let lam = |v: f64| lambda(v, s, Family::First).unwrap();
        let mut acc = 0.5 * (lam(a) + lam(b));
        for i in 1..n {
            acc += lam(a + i as f64 * h);
        }
        let oracle = 0.0 - acc * h;
        let got = rarefaction_u(a, 0.0, b, s, Family::First).unwrap();
        assert_abs_diff_eq!(got, oracle, epsilon = 1e-8);
    }

    #[test]
    fn star_states_zero_strength() {
        let st = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let ends = EndStates { left: st, right: st };
        let stars = solve_star_states(&ends, 1e-12).unwrap();
        assert_abs_diff_eq!(stars.v_minus_star, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stars.v_plus_star, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stars.u_star, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stars.theta_minus_star, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(stars.p_star, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn star_states_recover_forward_construction() {
        let left = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let (ends, stars_ref) = construct_end_states(left, 0.1, 0.08, 0.05).unwrap();
        let stars = solve_star_states(&ends, 1e-12).unwrap();
        assert_abs_diff_eq!(stars.v_minus_star, stars_ref.v_minus_star, epsilon = 1e-8);
        assert_abs_diff_eq!(stars.v_plus_star, stars_ref.v_plus_star, epsilon = 1e-8);
        assert_abs_diff_eq!(stars.u_star, stars_ref.u_star, epsilon = 1e-8);
        assert_abs_diff_eq!(
            stars.theta_plus_star,
            stars_ref.theta_plus_star,
            epsilon = 1e-8
        );
        // pressure equality across the contact
        let pm = pressure(stars.v_minus_star, stars.theta_minus_star).unwrap();
        let pp = pressure(stars.v_plus_star, stars.theta_plus_star).unwrap();
        assert_abs_diff_eq!(pm, pp, epsilon = 1e-10);
    }

    #[test]
    fn star_states_reject_inadmissible_data() {
        // shrink the right volume below its curve domain: compression, not
        // reachable by the two rarefaction curves
        let left = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let (mut ends, _) = construct_end_states(left, 0.1, 0.05, 0.05).unwrap();
        ends.right.u[0] -= 1.0; // demand far more velocity than the curves give
        let err = solve_star_states(&ends, 1e-10);
        assert!(matches!(err, Err(VpbError::NoSolution(_))));
    }

    #[test]
    fn fan_eval_far_fields_and_contact_jump() {
        let left = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let (ends, stars) = construct_end_states(left, 0.08, 0.06, 0.07).unwrap();
        let far_l = riemann_fan_eval(&stars, &ends, -1e6).unwrap();
        assert_abs_diff_eq!(far_l.v, ends.left.v, epsilon = 1e-14);
        let far_r = riemann_fan_eval(&stars, &ends, 1e6).unwrap();
        assert_abs_diff_eq!(far_r.v, ends.right.v, epsilon = 1e-14);
        let just_left = riemann_fan_eval(&stars, &ends, -1e-12).unwrap();
        let just_right = riemann_fan_eval(&stars, &ends, 1e-12).unwrap();
        assert_abs_diff_eq!(just_left.v, stars.v_minus_star, epsilon = 1e-12);
        assert_abs_diff_eq!(just_right.v, stars.v_plus_star, epsilon = 1e-12);
        assert_abs_diff_eq!(just_left.u[0], just_right.u[0], epsilon = 1e-12);
    }

    #[test]
    fn fan_eval_residual_inside_fan() {
        let left = ThermoState::new(1.0, 0.0, 1.0).unwrap();
        let (ends, stars) = construct_end_states(left, 0.08, 0.06, 0.07).unwrap();
        let s_plus = entropy(ends.right.v, ends.right.theta).unwrap();
        let lam_lo = lambda(stars.v_plus_star, s_plus, Family::Third).unwrap();
        let lam_hi = lambda(ends.right.v, s_plus, Family::Third).unwrap();
        let mut prev_v = f64::INFINITY;
        for k in 1..20 {
            let xi = lam_lo + (lam_hi - lam_lo) * k as f64 / 20.0;
            let st = riemann_fan_eval(&stars, &ends, xi).unwrap();
            let back = lambda(st.v, s_plus, Family::Third).unwrap();
            assert_abs_diff_eq!(back, xi, epsilon = 1e-10);
            // v decreases with xi along the 3-fan (lambda_+ decreasing in v)
            assert!(st.v < prev_v);
            prev_v = st.v;
        }
    }
}
