//! Temperature-dependent transport coefficients. The kinetic scaling for
//! hard spheres suggests a sqrt(theta) law; the exponent is configurable.

/// Power-law coefficient c * theta^e.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportModel {
    pub coeff: f64,
    pub exponent: f64,
}

impl TransportModel {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }

    /// Hard-sphere scaling with unit coefficient.
    pub fn hard_sphere() -> Self {
        Self::new(1.0, 0.5)
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.coeff * theta.powf(self.exponent)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.coeff * self.exponent * theta.powf(self.exponent - 1.0)
    }
}

/// Viscosity, heat conduction and charge-diffusion models used by the
/// profile constructions and the fluid solver.
#[derive(Debug, Clone, Copy)]
pub struct TransportModels {
    pub mu: TransportModel,
    pub kappa: TransportModel,
    pub kappa1: TransportModel,
}

impl Default for TransportModels {
    fn default() -> Self {
        Self {
            mu: TransportModel::hard_sphere(),
            kappa: TransportModel::hard_sphere(),
            kappa1: TransportModel::hard_sphere(),
        }
    }
}
