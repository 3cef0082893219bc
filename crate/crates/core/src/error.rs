use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid minorization: {0}")]
    InvalidMinorization(String),

    #[error("no regenerations: {0}")]
    NoRegenerations(String),

    #[error("no analytic oracle for {0}")]
    UnsupportedOracle(String),

    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("pilot tuning failed: {0}")]
    Tuning(String),

    #[error("numerical failure at step {step}: {msg}")]
    Numerical { step: usize, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
