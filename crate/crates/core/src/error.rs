use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HsvdError>;

#[derive(Debug, Error)]
pub enum HsvdError {
    /// The dense SVD/QR kernel failed to converge.
    #[error("decomposition failed for {rows}x{cols} matrix")]
    Decomposition { rows: usize, cols: usize },

    /// A precondition of an operation was not met by its inputs.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The relative error is undefined because the reference has zero norm.
    #[error("undefined metric: reference rank-{k} approximation has zero norm")]
    UndefinedMetric { k: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Kernel failure inside the block pipeline, tagged with the row slice.
    #[error("row slice {index}: {source}")]
    Slice {
        index: usize,
        #[source]
        source: Box<HsvdError>,
    },
}

impl HsvdError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        HsvdError::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HsvdError::Io {
            path: path.into(),
            source,
        }
    }
}
