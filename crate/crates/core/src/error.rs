use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(PathBuf),

    #[error("image is {width}x{height}, smaller than the {min}x{min} minimum")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("neighborhood graph is disconnected into {} components (sizes {component_sizes:?})", component_sizes.len())]
    DisconnectedGraph { component_sizes: Vec<usize> },

    #[error("malformed distance matrix file: {0}")]
    MalformedMatrix(String),

    #[error("malformed report: {0}")]
    MalformedReport(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
