use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("input contains non-finite values (row {0})")]
    NonFinite(usize),

    #[error("label sequences have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("requested {k} clusters but only {n} points available")]
    TooFewPoints { k: usize, n: usize },

    #[error("invalid matrix shape: {0}")]
    Shape(String),

    #[error("{path}: {msg}")]
    Format { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
