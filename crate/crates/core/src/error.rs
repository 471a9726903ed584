use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("n_steps = {n_steps} is not a power of two (required for FFT synthesis)")]
    Resolution { n_steps: usize },

    #[error("circulant embedding is not nonnegative-definite and Cholesky fallback needs {needed} points (limit {limit})")]
    Capacity { needed: usize, limit: usize },

    #[error("Hurst index {hurst} < 1/2 needs a rough-path solver, which is not supported")]
    UnsupportedRegime { hurst: f64 },

    #[error("covariance model error: {0}")]
    Model(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(#[from] crate::occupation::Rejection),

    #[error("alpha = 0 has no Riesz potential; use local_time_histogram for the local-time branch")]
    AlphaZeroRedirect,

    #[error("configuration rejected:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("reproducibility failure: {0}")]
    Reproducibility(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("malformed path file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
