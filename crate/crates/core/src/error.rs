use thiserror::Error;

use crate::geometry::{ClassId, ExemplarId};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exemplar {0} not found in class dataset")]
    NotFound(ExemplarId),

    #[error("invalid state: class {class_id} {reason}")]
    InvalidState { class_id: ClassId, reason: String },

    /// Malformed data file. `location` names a byte offset or a line number.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
