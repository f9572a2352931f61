use thiserror::Error;

/// Errors raised anywhere in the simulation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NonPositiveDefinite { index: usize, pivot: f64 },

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("bit length {len} is not a multiple of {bits_per_symbol}")]
    Length { len: usize, bits_per_symbol: usize },

    #[error("ML search space of {size} candidates exceeds the limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },

    #[error("matrix does not have full column rank")]
    RankDeficient,

    #[error("matrix is singular (smallest singular value {0})")]
    Singular(f64),

    #[error("n_t * n_r = {0} is too large for the log-space evaluation")]
    OverflowGuard(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
