use std::path::PathBuf;

use thiserror::Error;

/// A malformed input line.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        Self {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum MocapError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error(transparent)]
    Core(#[from] mocap_core::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MocapError>;

impl MocapError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MocapError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file path to a parse error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            MocapError::Syntax(source) => MocapError::Parse {
                path: path.into(),
                source,
            },
            other => other,
        }
    }
}
