use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instance {instance}: {message}")]
    Validation { instance: String, message: String },
    #[error("cannot align aspect: {0}")]
    Alignment(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training diverged at epoch {epoch}, instance {instance}: loss is {loss}")]
    NonFiniteLoss { epoch: usize, instance: usize, loss: f64 },
    #[error("stratification impossible: class {class} has {count} members, need at least {k}")]
    Stratification { class: i8, count: usize, k: usize },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("unsupported archive format version {found} (this build reads {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },
    #[error("corrupt archive: {0}")]
    Corrupt(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
