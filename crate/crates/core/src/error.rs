use thiserror::Error;

/// Errors raised by the certification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("problem failed the affinity audit: {0}")]
    Affinity(String),

    #[error("delays are not commensurate with step {step}: {detail}")]
    NonCommensurate { step: f64, detail: String },

    #[error("insufficient history: need {needed} states, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
