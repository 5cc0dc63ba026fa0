use thiserror::Error;

use crate::train::TrainReport;

pub type Result<T> = std::result::Result<T, SggdError>;

#[derive(Debug, Error)]
pub enum SggdError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size overflow: {0}")]
    SizeOverflow(String),

    #[error("circuit expects {expected} parameters, got {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-finite cost {value} at epoch {epoch}")]
    Diverged {
        epoch: usize,
        value: f64,
        partial: Box<TrainReport>,
    },

    #[error("rejection sampling gave up after {0} draws")]
    SamplingCap(usize),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error at `{key}`: {message}")]
    ConfigSchema { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("output directory {0} already exists")]
    OutputExists(String),
}

impl SggdError {
    pub fn schema(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::ConfigSchema {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures caused by user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Self::ConfigParse { .. }
                | Self::ConfigSchema { .. }
                | Self::Io { .. }
                | Self::OutputExists(_)
                | Self::InvalidArgument(_)
        )
    }
}
