use thiserror::Error;

/// Errors produced by the samplers, solvers and diagnostics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An input failed a structural precondition (not a projector, not symmetric, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// The input is valid but the algorithm has nothing to work with
    /// (zero eigenvector positive part, spike without positive entries, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("instance too large for exhaustive search: n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
