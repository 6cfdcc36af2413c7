use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("special function evaluation failed: {0}")]
    Evaluation(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument outside the covered range: {0}")]
    Range(String),

    #[error("region not covered by the radial grid: {0}")]
    Coverage(String),

    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
