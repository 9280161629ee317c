use std::path::PathBuf;

use artemis_server::ServerError;
use artemis_sim::SimError;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] artemis_core::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Server(#[from] ServerError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Write {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Core(e) => core_code(e),
            CliError::Sim(SimError::Core(e)) => core_code(e),
            CliError::Sim(_) => exit::DATA,
            CliError::Server(ServerError::Storage { .. }) => exit::RUNTIME,
            CliError::Server(_) => exit::DATA,
            CliError::Write { .. } | CliError::Runtime(_) => exit::RUNTIME,
        }
    }
}

fn core_code(e: &artemis_core::Error) -> i32 {
    match e {
        artemis_core::Error::InvalidConfig(_) => exit::USAGE,
        _ => exit::DATA,
    }
}
