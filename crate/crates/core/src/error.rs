use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the optimizer library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration space: {0}")]
    InvalidSpace(String),

    #[error("value for parameter `{name}` is out of bounds: {detail}")]
    OutOfBounds { name: String, detail: String },

    #[error("invalid value for `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("duplicate result for job {0}")]
    DuplicateResult(u64),

    #[error("unknown job {0}")]
    UnknownJob(u64),

    #[error("benchmark evaluation failed: {0}")]
    Evaluation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {what}: {reason}")]
    Parse { what: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether this error reflects invalid user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpace(_)
                | Error::OutOfBounds { .. }
                | Error::InvalidParam { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
