//! Discrete-velocity kinetic machinery: Maxwellians, moments, the
//! orthonormal chi-basis with its projections, the hard-sphere collision
//! operator and the linearized operators with their subspace inverses.

pub mod collision;
pub mod grid;
pub mod linearized;
pub mod maxwell;
pub mod proj;

pub use collision::{collision_q, conservation_defect, nu_closed, nu_freq, CollisionQuad};
pub use grid::{Distribution, GridKind, VelocityGrid};
pub use linearized::{gbar, kappa1_moment, LinearizedOperator, OperatorKind};
pub use maxwell::{
    maxwellian, micro_macro_split, moments, GlobalMaxwellianStar, MaxwellParams, Moments,
};
pub use proj::{chi_basis, inner_product, Projector};
