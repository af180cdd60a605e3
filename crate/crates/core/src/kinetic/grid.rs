//! Velocity-space grids: tensor Gauss-Hermite grids for moment and
//! projection work, uniform boxes for the collision operator (post-collision
//! velocities need a regular spacing to interpolate on).

use crate::error::{Result, VpbError};
use crate::kinetic::MaxwellParams;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    /// Tensor Gauss-Hermite grid of a given order per axis, centered and
    /// scaled for one Maxwellian family.
    GaussHermite { order: usize },
    /// Uniform node-centered box with `n` nodes per axis on
    /// [c - w, c + w]^3.
    UniformBox { n: usize, half_width: f64 },
}

#[derive(Debug, Clone)]
pub struct VelocityGrid {
    pub kind: GridKind,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub center: [f64; 3],
    /// Per-axis 1D coordinates (offsets from the center already applied).
    pub axis: Vec<f64>,
}

/// Nodes and Christoffel weights of the n-point Gauss-Hermite rule for
/// weight e^(-t^2), found by bisection on the orthonormal recurrence.
fn gauss_hermite_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    // orthonormal Hermite values p_0..p_n at t
    let eval = |t: f64| -> (f64, Vec<f64>) {
        let mut p = Vec::with_capacity(n + 1);
        let mut pkm1 = 0.0f64;
        let mut pk = std::f64::consts::PI.powf(-0.25);
        p.push(pk);
        for k in 0..n {
            let pkp1 = t * (2.0 / (k as f64 + 1.0)).sqrt() * pk
                - (k as f64 / (k as f64 + 1.0)).sqrt() * pkm1;
            pkm1 = pk;
            pk = pkp1;
            p.push(pk);
        }
        (pk, p)
    };
    let hi = (2.0 * n as f64 + 2.0).sqrt();
    let scan = 8 * n;
    let mut roots = Vec::with_capacity(n);
    let mut prev_t = -hi;
    let mut prev_v = eval(prev_t).0;
    for k in 1..=scan {
        let t = -hi + 2.0 * hi * k as f64 / scan as f64;
        let v = eval(t).0;
        if prev_v == 0.0 {
            roots.push(prev_t);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut up) = (prev_t, t);
            let mut flo = prev_v;
            for _ in 0..90 {
                let mid = 0.5 * (lo + up);
                let fm = eval(mid).0;
                if flo * fm <= 0.0 {
                    up = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + up));
        }
        prev_t = t;
        prev_v = v;
    }
    assert_eq!(roots.len(), n, "Gauss-Hermite root scan missed a root");
    // symmetrize to machine precision
    for i in 0..n / 2 {
        let s = 0.5 * (roots[n - 1 - i] - roots[i]);
        roots[i] = -s;
        roots[n - 1 - i] = s;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }
    let weights = roots
        .iter()
        .map(|&t| {
            let (_, p) = eval(t);
            1.0 / p[..n].iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    (roots, weights)
}

impl VelocityGrid {
    /// Tensor Gauss-Hermite grid adapted to the Maxwellian family of
    /// `params`: nodes u + sqrt(2 R theta) t_i, weights scaled so that
    /// sums against nodal values approximate integrals d xi.
    pub fn gauss_hermite(order: usize, params: &MaxwellParams) -> Result<Arc<Self>> {
        if order < 2 {
            return Err(VpbError::Domain("Gauss-Hermite order must be >= 2".into()));
        }
        params.validate()?;
        let (t, w) = gauss_hermite_1d(order);
        let scale = (2.0 * crate::eos::R_GAS * params.theta).sqrt();
        let axis: Vec<f64> = t.iter().map(|&ti| scale * ti).collect();
        // integration weight per axis: w_i e^(t_i^2) * scale
        let w1: Vec<f64> = t
            .iter()
            .zip(&w)
            .map(|(&ti, &wi)| wi * (ti * ti).exp() * scale)
            .collect();
        let n = order;
        let mut nodes = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    nodes.push([
                        params.u[0] + axis[ix],
                        params.u[1] + axis[iy],
                        params.u[2] + axis[iz],
                    ]);
                    weights.push(w1[ix] * w1[iy] * w1[iz]);
                }
            }
        }
        Ok(Arc::new(Self {
            kind: GridKind::GaussHermite { order },
            nodes,
            weights,
            center: params.u,
            axis,
        }))
    }

    /// Uniform box grid with n nodes per axis on [c - w, c + w]^3 and
    /// product weights h^3.
    pub fn uniform_box(n: usize, half_width: f64, center: [f64; 3]) -> Result<Arc<Self>> {
        if n < 4 {
            return Err(VpbError::Domain("box grid needs at least 4 nodes per axis".into()));
        }
        if !(half_width > 0.0) {
            return Err(VpbError::Domain("box half-width must be positive".into()));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| -half_width + i as f64 * h).collect();
        let w3 = h * h * h;
        let mut nodes = Vec::with_capacity(n * n * n);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    nodes.push([
                        center[0] + axis[ix],
                        center[1] + axis[iy],
                        center[2] + axis[iz],
                    ]);
                }
            }
        }
        Ok(Arc::new(Self {
            kind: GridKind::UniformBox { n, half_width },
            nodes,
            weights: vec![w3; n * n * n],
            center,
            axis,
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn axis_len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_box(&self) -> bool {
        matches!(self.kind, GridKind::UniformBox { .. })
    }

    pub fn box_spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::UniformBox { .. } => Some(self.axis[1] - self.axis[0]),
            _ => None,
        }
    }

    /// Sum of weights * values: the velocity-space integral.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Trilinear interpolation of nodal `values` at a point; zero outside
    /// the box. Only valid on uniform boxes.
    pub fn trilinear(&self, values: &[f64], p: [f64; 3]) -> f64 {
        let n = self.axis_len();
        let h = self.axis[1] - self.axis[0];
        let inv_h = 1.0 / h;
        let mut idx = [0usize; 3];
        let mut fr = [0.0f64; 3];
        for d in 0..3 {
            let fx = (p[d] - self.center[d] - self.axis[0]) * inv_h;
            if !(0.0..=(n - 1) as f64).contains(&fx) {
                return 0.0;
            }
            let i = (fx.floor() as usize).min(n - 2);
            idx[d] = i;
            fr[d] = fx - i as f64;
        }
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let (fx, fy, fz) = (fr[0], fr[1], fr[2]);
        let base = (i * n + j) * n + k;
        let nn = n * n;
        let c000 = values[base];
        let c001 = values[base + 1];
        let c010 = values[base + n];
        let c011 = values[base + n + 1];
        let c100 = values[base + nn];
        let c101 = values[base + nn + 1];
        let c110 = values[base + nn + n];
        let c111 = values[base + nn + n + 1];
        let c00 = c000 + fz * (c001 - c000);
        let c01 = c010 + fz * (c011 - c010);
        let c10 = c100 + fz * (c101 - c100);
        let c11 = c110 + fz * (c111 - c110);
        let c0 = c00 + fy * (c01 - c00);
        let c1 = c10 + fy * (c11 - c10);
        c0 + fx * (c1 - c0)
    }
}

/// Values of a velocity-space density on a grid.
#[derive(Debug, Clone)]
pub struct Distribution {
    pub values: Vec<f64>,
    pub grid: Arc<VelocityGrid>,
}

impl Distribution {
    pub fn new(values: Vec<f64>, grid: Arc<VelocityGrid>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self { values, grid }
    }

    pub fn zeros(grid: Arc<VelocityGrid>) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| a * v).collect(),
            grid: self.grid.clone(),
        }
    }

    pub fn add_scaled(&mut self, a: f64, other: &Distribution) {
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }

    pub fn sub(&self, other: &Distribution) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            grid: self.grid.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_rule_integrates_monomials() {
        let (t, w) = gauss_hermite_1d(24);
        // int e^(-t^2) dt = sqrt(pi), int t^2 e^(-t^2) = sqrt(pi)/2
        let s0: f64 = w.iter().sum();
        let s2: f64 = t.iter().zip(&w).map(|(t, w)| w * t * t).sum();
        let s10: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(10)).sum();
        let pi = std::f64::consts::PI;
        assert_abs_diff_eq!(s0, pi.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(s2, pi.sqrt() / 2.0, epsilon = 1e-13);
        // 10th moment: (9!!/2^5) sqrt(pi) = 945/32 sqrt(pi)
        assert_abs_diff_eq!(s10, 945.0 / 32.0 * pi.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn grids_are_symmetric_about_center() {
        let p = MaxwellParams::new(1.0, [0.3, -0.1, 0.0], 1.4).unwrap();
        let g = VelocityGrid::gauss_hermite(12, &p).unwrap();
        for &a in &g.axis {
            assert!(g.axis.iter().any(|&b| (a + b).abs() < 1e-12));
        }
        let b = VelocityGrid::uniform_box(16, 7.0, [0.0; 3]).unwrap();
        for &a in &b.axis {
            assert!(b.axis.iter().any(|&c| (a + c).abs() < 1e-12));
        }
    }

    #[test]
    fn box_trilinear_reproduces_linear_fields() {
        let g = VelocityGrid::uniform_box(8, 4.0, [1.0, 0.0, -2.0]).unwrap();
        let vals: Vec<f64> = g
            .nodes
            .iter()
            .map(|p| 2.0 + 0.5 * p[0] - p[1] + 0.25 * p[2])
            .collect();
        for p in [[1.3, 0.7, -2.4], [0.0, -1.0, 0.0], [-2.5, 3.0, -5.5]] {
            let want = 2.0 + 0.5 * p[0] - p[1] + 0.25 * p[2];
            assert_abs_diff_eq!(g.trilinear(&vals, p), want, epsilon = 1e-12);
        }
        // outside the box: zero
        assert_eq!(g.trilinear(&vals, [100.0, 0.0, 0.0]), 0.0);
    }
}
