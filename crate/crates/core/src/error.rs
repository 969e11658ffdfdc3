use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("quadrature did not converge: achieved error {achieved:e}, target {target:e}")]
    Quadrature { achieved: f64, target: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("Picard iteration is not contracting: distances {0:?}")]
    NonContraction(Vec<f64>),
    #[error("test function support: {0}")]
    Support(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("store corrupted at line {line}: {msg}")]
    Store { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}
