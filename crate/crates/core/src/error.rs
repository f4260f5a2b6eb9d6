use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |h - h†| = {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical invariant violated: {0}")]
    Numerical(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    ///
    /// 2 for configuration problems, 3 for numerical-invariant failures and
    /// 4 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter(_) => 2,
            Error::NotHermitian { .. }
            | Error::Dimension(_)
            | Error::InvalidState(_)
            | Error::Numerical(_) => 3,
            Error::Io { .. } => 4,
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "not-hermitian",
            Error::Dimension(_) => "dimension",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InvalidState(_) => "invalid-state",
            Error::Numerical(_) => "numerical",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
        }
    }
}
