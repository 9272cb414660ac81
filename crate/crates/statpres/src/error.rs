use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Core(#[from] statpres_core::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    CertificationFailure = 1,
    Usage = 2,
    Unstable = 3,
}

impl Error {
    pub fn exit(&self) -> Exit {
        match self {
            Error::Core(statpres_core::Error::Unstable { .. }) => Exit::Unstable,
            _ => Exit::Usage,
        }
    }
}
