use std::io;

use thiserror::Error;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: duplicate run ({algorithm}, {problem}, {run})")]
    DuplicateRun {
        line: u64,
        algorithm: String,
        problem: String,
        run: u64,
    },

    #[error("incomplete design: algorithm '{algorithm}' has no runs on problem '{problem}'")]
    IncompleteDesign { algorithm: String, problem: String },

    #[error("empty sample for ({algorithm}, {problem})")]
    EmptyCell { algorithm: String, problem: String },

    #[error("empty sample")]
    EmptySample,

    #[error("inconsistent outcome set: {0}")]
    InconsistentDesign(String),

    #[error("unknown comparison: {0}")]
    UnknownComparison(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => ErrorKind::Config,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Data,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io(e),
            other => Error::Parse {
                line,
                message: format!("{other:?}"),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
