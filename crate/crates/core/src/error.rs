use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid dimension {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("grids differ ({left} vs {right}); refine both sets to a common grid first")]
    RefinementRequired { left: String, right: String },

    #[error("weight is not balanced: {0}")]
    Unbalanced(String),

    #[error("invalid chain state: {0}")]
    State(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("no certificate found after {trials} trials ({zero_min} had an empty side)")]
    NoCertificate { trials: u64, zero_min: u64 },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
