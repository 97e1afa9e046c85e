//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} substituents, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("degenerate quadratic form: rank {rank} of {dim}")]
    DegenerateForm { rank: usize, dim: usize },
    #[error("singular point: gradient of the defining polynomial vanishes")]
    SingularPoint,
    #[error("invalid hypersurface: {0}")]
    InvalidSurface(String),
    #[error("basis is not closed under the bracket")]
    NotClosed,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
