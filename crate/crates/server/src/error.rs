use std::path::PathBuf;

use thiserror::Error;

use crate::registry::VictimStatus;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("invalid report: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("unknown victim {0:?}")]
    NotFound(String),
    #[error("victim {victim:?} cannot move from {from} to {to}")]
    Conflict {
        victim: String,
        from: VictimStatus,
        to: VictimStatus,
    },
    #[error("event log {path}: {source}")]
    Storage {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A complete line in the middle of the log does not parse.
    #[error("event log {path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

pub type Result<T, E = ServerError> = std::result::Result<T, E>;
