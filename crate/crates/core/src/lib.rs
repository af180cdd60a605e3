//! Numerical laboratory for the composite wave pattern (two rarefaction
//! waves around a viscous contact wave) of the one-dimensional bipolar
//! Vlasov-Poisson-Boltzmann system: micro-macro kinetic machinery on
//! discrete velocity grids, wave-profile construction in Lagrangian
//! coordinates, and a closed Navier-Stokes-Poisson solver that exercises
//! the stability and decay estimates.

pub mod burgers;
pub mod cli;
pub mod composite;
pub mod config;
pub mod contact;
pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod fluid;
pub mod kinetic;
pub mod output;
pub mod quad;
pub mod transport;

pub use error::{Result, VpbError};

/// Version string embedded in every JSON summary.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
