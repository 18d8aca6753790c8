use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{what} size {size} exceeds limit {limit}")]
    Size {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by a resource guard (qubit count, enumeration size).
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::Size { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
