//! Exact solution of the Burgers problem w_t + w w_x = 0 with monotone
//! tanh data, by the method of characteristics. This transports the
//! smoothed fan speeds of the approximate rarefaction waves.

use crate::error::{Result, VpbError};

/// Monotone pair of characteristic speeds, w_l <= w_r.
#[derive(Debug, Clone, Copy)]
pub struct BurgersWave {
    pub w_l: f64,
    pub w_r: f64,
}

impl BurgersWave {
    pub fn new(w_l: f64, w_r: f64) -> Result<Self> {
        if !(w_l <= w_r) {
            return Err(VpbError::Domain(format!(
                "Burgers data must satisfy w_l <= w_r, got ({w_l}, {w_r})"
            )));
        }
        Ok(Self { w_l, w_r })
    }

    fn mid(&self) -> f64 {
        0.5 * (self.w_r + self.w_l)
    }

    fn half(&self) -> f64 {
        0.5 * (self.w_r - self.w_l)
    }

    /// Initial profile w0(x0) = mid + half * tanh(x0).
    pub fn w0(&self, x0: f64) -> f64 {
        self.mid() + self.half() * x0.tanh()
    }

    pub fn w0_prime(&self, x0: f64) -> f64 {
        let t = x0.tanh();
        self.half() * (1.0 - t * t)
    }

    fn w0_second(&self, x0: f64) -> f64 {
        let t = x0.tanh();
        -2.0 * t * self.half() * (1.0 - t * t)
    }

    /// Characteristic foot point: the unique root of x0 + w0(x0) t = x.
    pub fn foot_point(&self, x: f64, t: f64) -> f64 {
        if self.half() == 0.0 {
            return x - self.w_l * t;
        }
        let mut lo = x - self.w_r * t - 1.0;
        let mut hi = x - self.w_l * t + 1.0;
        // Newton from the midpoint, bisection safeguard
        let mut x0 = x - self.mid() * t;
        for _ in 0..200 {
            let f = x0 + self.w0(x0) * t - x;
            if f.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
            if f > 0.0 {
                hi = x0;
            } else {
                lo = x0;
            }
            let fp = 1.0 + self.w0_prime(x0) * t;
            let step = f / fp;
            let next = x0 - step;
            x0 = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-12 * (1.0 + x0.abs()).max(1.0) && step.abs() < 1e-12 {
                break;
            }
        }
        x0
    }

    /// w(x, t).
    pub fn w(&self, x: f64, t: f64) -> f64 {
        self.w0(self.foot_point(x, t))
    }

    /// w_x(x, t) = w0'(x0) / (1 + w0'(x0) t), strictly positive for w_l < w_r.
    pub fn wx(&self, x: f64, t: f64) -> f64 {
        let x0 = self.foot_point(x, t);
        let wp = self.w0_prime(x0);
        wp / (1.0 + wp * t)
    }

    /// w_xx(x, t) = w0''(x0) / (1 + w0'(x0) t)^3.
    pub fn wxx(&self, x: f64, t: f64) -> f64 {
        let x0 = self.foot_point(x, t);
        let d = 1.0 + self.w0_prime(x0) * t;
        self.w0_second(x0) / (d * d * d)
    }

    /// Both w and w_x from a single foot-point solve.
    pub fn w_and_wx(&self, x: f64, t: f64) -> (f64, f64) {
        let x0 = self.foot_point(x, t);
        let wp = self.w0_prime(x0);
        (self.w0(x0), wp / (1.0 + wp * t))
    }

    /// Riemann-fan solution w^r(x/t) of the same data: clamp(x/t, w_l, w_r).
    pub fn riemann_fan(&self, xi: f64) -> f64 {
        xi.clamp(self.w_l, self.w_r)
    }

    /// sup over x of |w(x, t) - w^r(x/t)| by dense sampling.
    pub fn sup_distance_to_fan(&self, t: f64, samples: usize) -> f64 {
        let lo = self.w_l * t - 30.0;
        let hi = self.w_r * t + 30.0;
        let mut sup: f64 = 0.0;
        for k in 0..=samples {
            let x = lo + (hi - lo) * k as f64 / samples as f64;
            let d = (self.w(x, t) - self.riemann_fan(x / t.max(1e-300))).abs();
            sup = sup.max(d);
        }
        sup
    }

    /// max over x of |w_x(x, t)|, located on the foot-point axis.
    pub fn max_wx(&self, t: f64, samples: usize) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..=samples {
            let x0 = -30.0 + 60.0 * k as f64 / samples as f64;
            let wp = self.w0_prime(x0);
            m = m.max((wp / (1.0 + wp * t)).abs());
        }
        m
    }

    /// max over x of |w_xx(x, t)|.
    pub fn max_wxx(&self, t: f64, samples: usize) -> f64 {
        let mut m: f64 = 0.0;
        for k in 0..=samples {
            let x0 = -30.0 + 60.0 * k as f64 / samples as f64;
            let d = 1.0 + self.w0_prime(x0) * t;
            m = m.max((self.w0_second(x0) / (d * d * d)).abs());
        }
        m
    }
}
