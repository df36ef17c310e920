use thiserror::Error;

/// Errors surfaced by estimators, constructions and the bench harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("sample must be nonempty")]
    EmptySample,

    #[error("point dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contamination is an arbitrary sampler and has no density")]
    NoDensity,

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
