use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curvature {0}: must be positive and finite")]
    InvalidCurvature(f64),

    /// A point lies on or outside the admissible ball (or has non-finite coordinates).
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("curvature mismatch: {0} vs {1}")]
    CurvatureMismatch(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("matrix is not Hermitian: |G[{i}][{j}] - conj(G[{j}][{i}])| = {deviation:e}")]
    NotHermitian { i: usize, j: usize, deviation: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("loss diverged at step {step}: {value}")]
    Divergence { step: usize, value: f64 },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: u64,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
