use thiserror::Error;

/// Errors raised by the model layer: shape violations, broken physical
/// invariants and numerical breakdowns.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("optimizer aborted in restart {restart}: {reason}")]
    OptimizerAborted { restart: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
