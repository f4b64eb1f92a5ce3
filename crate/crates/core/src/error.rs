use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: byte offset {offset}: {message}")]
    Truncated {
        path: PathBuf,
        offset: u64,
        message: String,
    },
    #[error("data error: {0}")]
    Data(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("no vector for word {0:?}")]
    Lookup(String),
    #[error("split error: {0}")]
    Split(String),
    #[error("could only generate {generated} of {requested} shuffled pairs after {attempts} attempts")]
    Generation {
        requested: usize,
        generated: usize,
        attempts: usize,
    },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("transport error: {0}")]
    Transport(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
