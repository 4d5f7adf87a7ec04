use std::path::PathBuf;

/// Errors produced by the estimators, models and clustering routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// A value in a data file that is not a finite number. Row and column are 1-based,
    /// rows counted from the first data line after the header.
    #[error("invalid value {value:?} at row {row}, column {col}")]
    InvalidCell {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid matrix: {0}")]
    Matrix(String),

    #[error("ARI undefined: {0}")]
    AriUndefined(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! param_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Parameter(format!($($arg)*))
    };
}
pub(crate) use param_err;
