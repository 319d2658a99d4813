use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DfdrError>;

#[derive(Debug, Error)]
pub enum DfdrError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed tabular input. `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("cannot preprocess subject '{subject}': column median is zero")]
    ZeroMedian { subject: String },

    #[error("unknown group '{0}'")]
    UnknownGroup(String),

    #[error("group '{group}' has {size} member(s); at least 2 are required")]
    GroupTooSmall { group: String, size: usize },

    #[error("p-value {value} at index {index} is outside [0, 1]")]
    PValueOutOfRange { index: usize, value: f64 },

    #[error(
        "pi0 is undefined: no null statistic is below lambda = {lambda}; \
         use the conservative pi0 = 1 mode instead"
    )]
    UndefinedPi0 { lambda: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("subset '{name}' has {size} tests; the minimum is {min}")]
    SubsetTooSmall {
        name: String,
        size: usize,
        min: usize,
    },
}

impl DfdrError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DfdrError::InvalidArgument(msg.into())
    }
}
