use std::path::PathBuf;

use thiserror::Error;

use crate::model::Family;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated at `{path}`: {message}")]
    Invariant { path: String, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("recursion diverged at index {index}")]
    Diverged { index: usize },

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("covariance unavailable: {0}")]
    CovarianceUnavailable(String),

    #[error("reconstructed {family} is not admissible at season {season} (value {value})")]
    Positivity {
        family: Family,
        season: usize,
        value: f64,
    },

    #[error("unsupported wavelet: {0}")]
    UnsupportedWavelet(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("CSV error at line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("column `{name}` not found; available columns: {available:?}")]
    MissingColumn { name: String, available: Vec<String> },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invariant(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invariant {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
