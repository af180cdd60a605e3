//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VpbError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Star-state root finding left the admissible region or ran out of budget.
    #[error("no star-state solution: {0}")]
    NoSolution(String),

    /// An iterative solve failed to reach its tolerance within the budget.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// A distribution expected to be microscopic has a macroscopic component.
    #[error("not microscopic: {0}")]
    NotMicroscopic(String),

    /// Moments with non-positive density or temperature.
    #[error("nonphysical moments: {0}")]
    NonphysicalMoments(String),

    /// Total charge is not zero, so the Poisson far-field conditions conflict.
    #[error("neutrality violated: {0}")]
    NeutralityViolated(String),

    /// v or theta became non-positive during time integration.
    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    /// Time step outside the explicit stability bound.
    #[error("stability violation: {0}")]
    StabilityViolation(String),

    /// Series handed to a fit was unusable.
    #[error("non-positive series: {0}")]
    NonPositiveSeries(String),

    /// Config file could not be parsed.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Config parsed but a value is invalid.
    #[error("validation error for key `{key}`: {msg}")]
    Validation { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VpbError>;

impl VpbError {
    /// Process exit code for the CLI: 2 for config problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            VpbError::Parse { .. } | VpbError::Validation { .. } => 2,
            _ => 1,
        }
    }
}
