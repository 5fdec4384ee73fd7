use thiserror::Error;

/// Errors raised by the discretization, operator and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty domain mask")]
    EmptyMask,

    #[error("shape does not fit inside the box: {0}")]
    ShapeOutsideBox(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("function is not supported in the domain: node {index} has value {value:e}")]
    SupportViolation { index: usize, value: f64 },

    #[error("negative input entry at node {index}: {value:e}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("box capacity exceeded: {needed} nodes per axis needed, limit is {limit}; lower alpha or raise the node limit")]
    CapacityExceeded { needed: usize, limit: usize },

    #[error("linear solve residual {residual:e} exceeds {tolerance:e}")]
    SolverFailure { residual: f64, tolerance: f64 },

    #[error("trace fit needs at least 3 usable layers, mesh provides {available}")]
    IllConditionedFit { available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
