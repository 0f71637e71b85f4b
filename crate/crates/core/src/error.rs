use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("quadrilateral is twisted")]
    Twisted,
    #[error("point ({x1}, {x2}) lies outside the domain [-1,1]^2")]
    OutsideDomain { x1: f64, x2: f64 },
    #[error("angle of the zero vector is undefined")]
    ZeroAngle,
    #[error("rotation parameters are not strictly ordered")]
    InvalidRotation,
    #[error("map has no exact inverse")]
    NoInverse,
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
