//! Scratch probe for grid-size calibration (not part of the deliverable
//! surface; kept for reproducing the acceptance-grid choices).

use std::time::Instant;
use vpbwave_core::kinetic::proj::Projector;
use vpbwave_core::kinetic::*;

fn main() {
    let params = MaxwellParams::new(1.0, [0.0; 3], 1.0).unwrap();

    // symmetrized conservation defect under refinement: near-Maxwellian pair
    for n in [16usize, 24, 32] {
        let grid = VelocityGrid::uniform_box(n, 8.0, [0.0; 3]).unwrap();
        let pf = MaxwellParams::new(1.05, [0.06, -0.03, 0.0], 0.95).unwrap();
        let pg = MaxwellParams::new(0.92, [-0.04, 0.05, 0.02], 1.08).unwrap();
        let f = maxwellian(&pf, &grid);
        let g = maxwellian(&pg, &grid);
        let quad = CollisionQuad {
            n_phi: 6,
            n_mu: 6,
            defect_warn: None,
            ..CollisionQuad::for_params(&params)
        };
        let t0 = Instant::now();
        let qfg = collision_q(&f, &g, &quad).unwrap();
        let qgf = collision_q(&g, &f, &quad).unwrap();
        let mut sym = qfg.clone();
        sym.add_scaled(1.0, &qgf);
        let d = conservation_defect(&sym);
        let worst = d.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let dun = conservation_defect(&qfg);
        println!(
            "n={n}: sym worst = {worst:.3e} (mass {:.2e}, mom {:.2e}, energy {:.2e}) unsym mass {:.2e} | {:.1}s",
            d[0], d[1], d[4], dun[0],
            t0.elapsed().as_secs_f64()
        );
    }

    // inverse roundtrip quality at 20^3 W 7
    let grid = VelocityGrid::uniform_box(20, 7.0, [0.0; 3]).unwrap();
    let proj = Projector::new(params, &grid);
    let quad = CollisionQuad::for_linearized(&params);
    let t0 = Instant::now();
    let lm =
        LinearizedOperator::assemble(OperatorKind::FullLinearized, params, &grid, &quad).unwrap();
    println!("assembly 20^3: {:.1}s", t0.elapsed().as_secs_f64());
    for seed in 0..3u32 {
        let k = 0.4 + 0.17 * seed as f64;
        let raw = Distribution::new(
            grid.nodes
                .iter()
                .zip(&proj.m.values)
                .map(|(p, &mv)| mv * (1.0 + 0.4 * (k * p[0]).sin() + 0.3 * (k * p[1] * p[2]).cos()))
                .collect(),
            grid.clone(),
        );
        let g = proj.p1(&raw);
        let mut hv = lm.apply_values(&g.values);
        proj.p1_values(&mut hv);
        let h = Distribution::new(hv, grid.clone());
        let t1 = Instant::now();
        let back = lm.invert_on_subspace(&h, &proj, 1e-5, 1e-8, 800).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..grid.len() {
            num += grid.weights[i] * (back.values[i] - g.values[i]).powi(2) / proj.m.values[i];
            den += grid.weights[i] * g.values[i] * g.values[i] / proj.m.values[i];
        }
        println!(
            "roundtrip rel = {:.3e}, solve {:.1}s",
            (num / den).sqrt(),
            t1.elapsed().as_secs_f64()
        );
    }
}
