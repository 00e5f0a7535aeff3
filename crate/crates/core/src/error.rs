use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("i/o error on {path}: {source}")]
    IoPath {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A malformed vecs file or index file.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    #[error("record {record} has dimension {found}, expected {expected}")]
    InconsistentDim {
        record: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in record {record}, component {component}")]
    NonFinite { record: usize, component: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("point id {id} out of range for {n} points")]
    IdOutOfRange { id: usize, n: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// An index or graph failed structural validation on load.
    #[error("invalid index: {0}")]
    InvalidIndex(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub(crate) fn io_path(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::IoPath {
            path: path.into(),
            source,
        }
    }
}
