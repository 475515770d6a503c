use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix is not positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("singular rank-one update: |1 + v'A^-1 u| = {denominator}")]
    SingularUpdate { denominator: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid image geometry: {0}")]
    Geometry(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` is neither `Clone` nor `PartialEq`; keep its kind and message.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{kind:?}: {message}")]
pub struct IoError {
    pub kind: std::io::ErrorKind,
    pub message: String,
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(IoError {
            kind: err.kind(),
            message: err.to_string(),
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
