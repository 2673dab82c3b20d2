use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (valid: 0..={max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid tenor: {0}")]
    InvalidTenor(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// `1 + δL <= 0`: the simple rate no longer maps to a positive bond ratio.
    #[error("rate explosion: 1 + δL = {0} is not positive")]
    RateExplosion(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{operation} requires regime {expected}")]
    RegimeMismatch {
        operation: &'static str,
        expected: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state is missing rate for tenor index {0}")]
    MissingRate(usize),

    #[error("non-finite integrand value at {0:?}")]
    NonFiniteIntegrand(Vec<f64>),

    #[error("correlation matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("path {path} exploded at t = {time}")]
    PathExplosion { path: usize, time: f64 },

    #[error("payoff references unsimulated state: {0}")]
    UnsimulatedState(String),

    #[error("{}:{line}: {message}", path.display())]
    Input {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
