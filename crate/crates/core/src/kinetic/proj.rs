//! The chi-basis of the macroscopic subspace and the projections P0, P1
//! (five conserved directions of the full linearized operator) and P_c
//! (single conserved direction of the charge-difference operator).

use crate::eos::R_GAS;
use crate::kinetic::grid::Distribution;
use crate::kinetic::maxwell::{maxwellian, MaxwellParams};

/// <g1, g2>_ref = int g1 g2 / ref d xi.
pub fn inner_product(g1: &Distribution, g2: &Distribution, reference: &Distribution) -> f64 {
    let g = &g1.grid;
    let mut acc = 0.0;
    for i in 0..g.len() {
        acc += g.weights[i] * g1.values[i] * g2.values[i] / reference.values[i];
    }
    acc
}

/// The five pairwise orthonormal basis vectors of the macroscopic space:
/// chi_0 = M/sqrt(rho), chi_i = (xi_i - u_i) M / sqrt(R theta rho),
/// chi_4 = (|xi-u|^2/(R theta) - 3) M / sqrt(6 rho).
pub fn chi_basis(params: &MaxwellParams, m: &Distribution) -> [Distribution; 5] {
    let grid = &m.grid;
    let sr = params.rho.sqrt();
    let si = (R_GAS * params.theta * params.rho).sqrt();
    let s4 = (6.0 * params.rho).sqrt();
    let rt = R_GAS * params.theta;
    let mut chis: Vec<Distribution> = Vec::with_capacity(5);
    chis.push(m.scaled(1.0 / sr));
    for d in 0..3 {
        let values = grid
            .nodes
            .iter()
            .zip(&m.values)
            .map(|(p, &mv)| (p[d] - params.u[d]) * mv / si)
            .collect();
        chis.push(Distribution::new(values, grid.clone()));
    }
    let values = grid
        .nodes
        .iter()
        .zip(&m.values)
        .map(|(p, &mv)| {
            let d0 = p[0] - params.u[0];
            let d1 = p[1] - params.u[1];
            let d2 = p[2] - params.u[2];
            ((d0 * d0 + d1 * d1 + d2 * d2) / rt - 3.0) * mv / s4
        })
        .collect();
    chis.push(Distribution::new(values, grid.clone()));
    chis.try_into().unwrap()
}

/// Precomputed projection context for one local Maxwellian.
pub struct Projector {
    pub params: MaxwellParams,
    pub m: Distribution,
    pub chis: [Distribution; 5],
}

impl Projector {
    pub fn new(params: MaxwellParams, grid: &std::sync::Arc<crate::kinetic::grid::VelocityGrid>) -> Self {
        let m = maxwellian(&params, grid);
        let chis = chi_basis(&params, &m);
        Self { params, m, chis }
    }

    /// Macroscopic projection P0 g = sum_j <g, chi_j> chi_j.
    pub fn p0(&self, g: &Distribution) -> Distribution {
        let mut out = Distribution::zeros(g.grid.clone());
        for chi in &self.chis {
            let c = inner_product(g, chi, &self.m);
            out.add_scaled(c, chi);
        }
        out
    }

    /// Microscopic projection P1 = I - P0.
    pub fn p1(&self, g: &Distribution) -> Distribution {
        let mut out = g.clone();
        for chi in &self.chis {
            let c = inner_product(g, chi, &self.m);
            out.add_scaled(-c, chi);
        }
        out
    }

    /// P_c g = g - (int g d xi / rho) M, annihilating the single conserved
    /// moment of the charge-difference distribution.
    pub fn pc(&self, g: &Distribution) -> Distribution {
        let total = g.integral();
        let mut out = g.clone();
        out.add_scaled(-total / self.params.rho, &self.m);
        out
    }

    /// In-place variant of `p1` on raw values (used by iterative solves).
    pub fn p1_values(&self, values: &mut [f64]) {
        let grid = &self.m.grid;
        for chi in &self.chis {
            let mut c = 0.0;
            for i in 0..grid.len() {
                c += grid.weights[i] * values[i] * chi.values[i] / self.m.values[i];
            }
            for i in 0..grid.len() {
                values[i] -= c * chi.values[i];
            }
        }
    }

    /// In-place projection off the P_c-conserved direction.
    pub fn pc_values(&self, values: &mut [f64]) {
        let grid = &self.m.grid;
        let mut total = 0.0;
        for i in 0..grid.len() {
            total += grid.weights[i] * values[i];
        }
        let c = total / self.params.rho;
        for i in 0..grid.len() {
            values[i] -= c * self.m.values[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::grid::VelocityGrid;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(u: [f64; 3]) -> (MaxwellParams, Projector) {
        let p = MaxwellParams::new(1.2, u, 0.9).unwrap();
        let g = VelocityGrid::gauss_hermite(24, &p).unwrap();
        let proj = Projector::new(p, &g);
        (p, proj)
    }

    fn random_distribution(proj: &Projector, seed: u64) -> Distribution {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = &proj.m.grid;
        let a: Vec<f64> = (0..6).map(|_| rng.random_range(-0.5..0.5)).collect();
        let values = grid
            .nodes
            .iter()
            .zip(&proj.m.values)
            .map(|(p, &mv)| {
                mv * (1.0
                    + a[0] * p[0]
                    + a[1] * p[1] * p[2]
                    + a[2] * p[0] * p[0]
                    + a[3] * (p[1] * p[1] * p[1])
                    + a[4] * p[2]
                    + a[5])
            })
            .collect();
        Distribution::new(values, grid.clone())
    }

    #[test]
    fn gram_matrix_is_identity() {
        for u in [[0.0; 3], [0.4, -0.2, 0.1]] {
            let (_, proj) = setup(u);
            for i in 0..5 {
                for j in 0..5 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let got = inner_product(&proj.chis[i], &proj.chis[j], &proj.m);
                    assert_abs_diff_eq!(got, want, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn projections_are_idempotent_and_complementary() {
        let (_, proj) = setup([0.0; 3]);
        let g = random_distribution(&proj, 3);
        let p0 = proj.p0(&g);
        let p1 = proj.p1(&g);
        // P0 + P1 = I
        for i in 0..g.values.len() {
            assert_abs_diff_eq!(p0.values[i] + p1.values[i], g.values[i], epsilon = 1e-12);
        }
        let p00 = proj.p0(&p0);
        let p11 = proj.p1(&p1);
        let scale = g.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        for i in 0..g.values.len() {
            assert!((p00.values[i] - p0.values[i]).abs() < 1e-12 * scale);
            assert!((p11.values[i] - p1.values[i]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn p1_output_is_microscopic() {
        let (_, proj) = setup([0.1, 0.0, -0.2]);
        let g = random_distribution(&proj, 11);
        let p1 = proj.p1(&g);
        let mom = crate::kinetic::maxwell::moments(&p1);
        assert!(mom.rho.abs() < 1e-10);
        assert!(mom.momentum.iter().all(|m| m.abs() < 1e-10));
        assert!(mom.energy.abs() < 1e-10);
    }

    #[test]
    fn maxwellian_is_fixed_by_p0() {
        let (_, proj) = setup([0.0; 3]);
        let p0m = proj.p0(&proj.m);
        let p1m = proj.p1(&proj.m);
        let peak = proj.m.values.iter().fold(0.0f64, |a, &v| a.max(v));
        for i in 0..proj.m.values.len() {
            assert!((p0m.values[i] - proj.m.values[i]).abs() < 1e-10 * peak);
            assert!(p1m.values[i].abs() < 1e-10 * peak);
        }
    }

    #[test]
    fn pc_annihilates_maxwellian_and_total_charge() {
        let (_, proj) = setup([0.0; 3]);
        let pcm = proj.pc(&proj.m);
        let peak = proj.m.values.iter().fold(0.0f64, |a, &v| a.max(v));
        for v in &pcm.values {
            assert!(v.abs() < 1e-12 * peak);
        }
        let g = random_distribution(&proj, 7);
        let pc = proj.pc(&g);
        assert!(pc.integral().abs() < 1e-10);
        // idempotent
        let pc2 = proj.pc(&pc);
        let scale = g.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        for i in 0..pc.values.len() {
            assert!((pc2.values[i] - pc.values[i]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn microscopic_part_carries_no_moments() {
        let (_, proj) = setup([0.0; 3]);
        let g = random_distribution(&proj, 23);
        let p1 = proj.p1(&g);
        let mut sum = proj.m.clone();
        sum.add_scaled(1.0, &p1);
        let m_alone = crate::kinetic::maxwell::moments(&proj.m);
        let m_plus = crate::kinetic::maxwell::moments(&sum);
        assert_abs_diff_eq!(m_alone.rho, m_plus.rho, epsilon = 1e-8);
        assert_abs_diff_eq!(m_alone.energy, m_plus.energy, epsilon = 1e-8);
    }
}
