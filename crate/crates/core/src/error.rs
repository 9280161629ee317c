use std::path::PathBuf;

use thiserror::Error;

use crate::data::Feature;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed table: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing mandatory column `{0}`")]
    MissingColumn(&'static str),
    #[error("feature `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("row {row}: feature `{feature}` is missing")]
    MissingFeature { row: usize, feature: Feature },
    #[error("vital `{feature}` = {value} is outside the accepted range")]
    OutOfRange { feature: Feature, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unsupported model format `{0}`")]
    UnsupportedFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
