use std::path::PathBuf;

/// Errors raised while loading inputs, running a survey or writing outputs.
#[derive(Debug, thiserror::Error)]
pub enum VlsError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{file}: attribute `{attribute}` references missing file {target}")]
    MissingReference {
        file: PathBuf,
        attribute: String,
        target: PathBuf,
    },

    #[error("scene part {0} is empty")]
    EmptyPart(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("LAS error: {0}")]
    Las(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("callback aborted the run: {0}")]
    Callback(String),
}

impl VlsError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VlsError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        VlsError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, VlsError>;
