use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, environment, policies and harness.
#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("item {item} is out of range for a ground set of {items} items")]
    OutOfRange { item: usize, items: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no selectable item for position {position}")]
    PolicyExhausted { position: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed experiment spec: {0}")]
    Spec(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CascadeError>;

impl CascadeError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CascadeError::InvalidConfig(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CascadeError::Io {
            path: path.into(),
            source,
        }
    }
}
