//! Small numerical kernels: adaptive Gauss-Kronrod quadrature and
//! finite-difference stencils used by the wave constructions.

/// 7-point Gauss / 15-point Kronrod nodes on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = hw * XGK[i];
        let fsum = f(c - x) + f(c + x);
        kron += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    (kron * hw, (kron - gauss).abs() * hw)
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`. Interval order is preserved (a > b flips the sign).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, tol)];
    let mut depth_guard = 0usize;
    while let Some((lo, hi, t)) = stack.pop() {
        depth_guard += 1;
        let (val, err) = gk15(&f, lo, hi);
        if err <= t || hi - lo < 1e-14 * (b - a).abs() || depth_guard > 100_000 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t));
            stack.push((mid, hi, 0.5 * t));
        }
    }
    total
}

/// Fourth-order centered first derivative of `f` at `x` with step `h`.
pub fn d4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        assert_abs_diff_eq!(v, 16.0, epsilon = 1e-12);
    }

    #[test]
    fn integrates_gaussian() {
        let v = integrate(|x| (-x * x).exp(), -8.0, 8.0, 1e-12);
        assert_abs_diff_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let v = integrate(|x| x, 2.0, 0.0, 1e-12);
        assert_abs_diff_eq!(v, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn d4_matches_analytic_derivative() {
        let d = d4(|x| x.sin(), 0.7, 1e-3);
        assert_abs_diff_eq!(d, 0.7f64.cos(), epsilon = 1e-12);
    }
}
