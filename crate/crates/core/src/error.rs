use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A text file (group definition, experiment config) failed to parse.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A configuration value is missing or out of range.
    #[error("config error: {0}")]
    Config(String),

    /// A computation could not produce a trustworthy value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// Configuration, parse and file problems map to 1; diagnostics raised by
    /// the numerical modules map to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) | Error::InvalidInput(_) => 2,
            Error::Parse { .. } | Error::Config(_) | Error::Io { .. } => 1,
        }
    }
}
