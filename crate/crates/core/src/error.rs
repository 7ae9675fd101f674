use thiserror::Error;

/// Errors shared across the crate.
#[derive(Error, Debug)]
pub enum Error {
    /// A drift failed class validation or has a non-integrable exponent.
    #[error("invalid drift: {0}")]
    InvalidDrift(String),

    /// A configuration is structurally unusable (empty grid, bad bounds, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A numerical routine failed (blow-up, missing bracket, degenerate path).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Operation requires a continuously differentiable kernel.
    #[error("kernel {0} is not continuously differentiable")]
    NonDifferentiableKernel(String),

    /// Parameters outside the supported family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
