use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration value (level, replicate counts, unknown names).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data that violates a precondition (sizes, non-finite values, ragged rows).
    #[error("invalid data: {0}")]
    Data(String),

    /// Grouping scheme that fails validation or a structure file that does not parse.
    #[error("invalid grouping scheme: {0}")]
    Scheme(String),

    #[error("index sets overlap at row {0}")]
    Overlap(usize),

    #[error("{what} needs at least {min} observations, got {got}")]
    TooSmall {
        what: &'static str,
        min: usize,
        got: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Scheme(_) | Error::Overlap(_) | Error::TooSmall { .. } => 2,
            Error::Csv(_) | Error::Io { .. } => 2,
            Error::Json(_) => 3,
        }
    }
}
