use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid phonon spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dynamics specification: {0}")]
    InvalidSpec(String),

    #[error("integration diverged after t = {last_good_t}")]
    Diverged { last_good_t: f64 },

    #[error("oracle configuration error: {0}")]
    OracleConfig(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("cannot compare time series: {0}")]
    Comparison(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing required config keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } | Error::Eigen(_) => 2,
            _ => 1,
        }
    }
}
