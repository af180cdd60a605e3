//! Maxwellians, moments and the micro-macro split of a distribution.

use crate::eos::R_GAS;
use crate::error::{Result, VpbError};
use crate::kinetic::grid::{Distribution, VelocityGrid};
use std::sync::Arc;

/// Fluid parameters of a Maxwellian. In Lagrangian applications the
/// density is rho = 1/v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellParams {
    pub rho: f64,
    pub u: [f64; 3],
    pub theta: f64,
}

impl MaxwellParams {
    pub fn new(rho: f64, u: [f64; 3], theta: f64) -> Result<Self> {
        let p = Self { rho, u, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !(self.theta > 0.0) {
            return Err(VpbError::Domain(format!(
                "Maxwellian requires rho > 0 and theta > 0, got rho = {}, theta = {}",
                self.rho, self.theta
            )));
        }
        Ok(())
    }

    /// Pointwise value rho (2 pi R theta)^(-3/2) e^(-|xi-u|^2 / (2 R theta)).
    pub fn value(&self, xi: [f64; 3]) -> f64 {
        let rt = R_GAS * self.theta;
        let d0 = xi[0] - self.u[0];
        let d1 = xi[1] - self.u[1];
        let d2 = xi[2] - self.u[2];
        let q = d0 * d0 + d1 * d1 + d2 * d2;
        self.rho * (2.0 * std::f64::consts::PI * rt).powf(-1.5) * (-q / (2.0 * rt)).exp()
    }
}

/// Nodal evaluation of the Maxwellian on a grid.
pub fn maxwellian(params: &MaxwellParams, grid: &Arc<VelocityGrid>) -> Distribution {
    let values = grid.nodes.iter().map(|&p| params.value(p)).collect();
    Distribution::new(values, grid.clone())
}

/// Raw conserved moments (rho, momentum, total energy).
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub rho: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl Moments {
    /// Fluid parameters, using e = theta (R = 2/3).
    pub fn params(&self) -> Result<MaxwellParams> {
        if !(self.rho > 0.0) {
            return Err(VpbError::NonphysicalMoments(format!(
                "density {} <= 0",
                self.rho
            )));
        }
        let u = [
            self.momentum[0] / self.rho,
            self.momentum[1] / self.rho,
            self.momentum[2] / self.rho,
        ];
        let u2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        let theta = self.energy / self.rho - 0.5 * u2;
        if !(theta > 0.0) {
            return Err(VpbError::NonphysicalMoments(format!(
                "temperature {theta} <= 0"
            )));
        }
        Ok(MaxwellParams {
            rho: self.rho,
            u,
            theta,
        })
    }
}

/// Moments against the five collision invariants 1, xi_i, |xi|^2/2.
pub fn moments(f: &Distribution) -> Moments {
    let g = &f.grid;
    let mut rho = 0.0;
    let mut m = [0.0f64; 3];
    let mut e = 0.0;
    for (idx, &v) in f.values.iter().enumerate() {
        let w = g.weights[idx];
        let p = g.nodes[idx];
        let wv = w * v;
        rho += wv;
        m[0] += wv * p[0];
        m[1] += wv * p[1];
        m[2] += wv * p[2];
        e += 0.5 * wv * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    }
    Moments {
        rho,
        momentum: m,
        energy: e,
    }
}

/// Split F = M + G with M the local Maxwellian of F's moments; the
/// remainder G carries no conserved moments.
pub fn micro_macro_split(f: &Distribution) -> Result<(MaxwellParams, Distribution)> {
    let params = moments(f).params()?;
    let m = maxwellian(&params, &f.grid);
    Ok((params, f.sub(&m)))
}

/// Global reference Maxwellian M_star: theta_star strictly between the
/// largest theta/2 and the smallest theta over the states in play, with
/// (v_star, u_star) centered in their ranges.
#[derive(Debug, Clone, Copy)]
pub struct GlobalMaxwellianStar {
    pub v_star: f64,
    pub u_star: [f64; 3],
    pub theta_star: f64,
    /// Largest observed |v - v*| + |u - u*| + |theta - theta*|.
    pub eta0_achieved: f64,
}

impl GlobalMaxwellianStar {
    /// Choose from a collection of (v, u1, theta) states covering the run.
    pub fn choose(states: &[(f64, f64, f64)]) -> Result<Self> {
        if states.is_empty() {
            return Err(VpbError::Domain("no states supplied".into()));
        }
        let mut th_min = f64::INFINITY;
        let mut th_max: f64 = 0.0;
        let mut v_min = f64::INFINITY;
        let mut v_max: f64 = 0.0;
        let mut u_min = f64::INFINITY;
        let mut u_max = f64::NEG_INFINITY;
        for &(v, u1, th) in states {
            th_min = th_min.min(th);
            th_max = th_max.max(th);
            v_min = v_min.min(v);
            v_max = v_max.max(v);
            u_min = u_min.min(u1);
            u_max = u_max.max(u1);
        }
        if !(0.5 * th_max < th_min) {
            return Err(VpbError::Domain(format!(
                "cannot place theta_star: need max(theta)/2 < min(theta), got [{th_min}, {th_max}]"
            )));
        }
        let theta_star = 0.5 * (0.5 * th_max + th_min);
        let v_star = 0.5 * (v_min + v_max);
        let u_star = [0.5 * (u_min + u_max), 0.0, 0.0];
        let eta0_achieved = states
            .iter()
            .map(|&(v, u1, th)| {
                (v - v_star).abs() + (u1 - u_star[0]).abs() + (th - theta_star).abs()
            })
            .fold(0.0f64, f64::max);
        Ok(Self {
            v_star,
            u_star,
            theta_star,
            eta0_achieved,
        })
    }

    pub fn params(&self) -> MaxwellParams {
        MaxwellParams {
            rho: 1.0 / self.v_star,
            u: self.u_star,
            theta: self.theta_star,
        }
    }
}
