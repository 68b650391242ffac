use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("field length {len} does not match grid size {expected}")]
    LengthMismatch { len: usize, expected: usize },

    /// The lens transform is only defined for `0 <= s < 1/omega`.
    #[error("s = {s} is outside the transformed time interval [0, {limit})")]
    TransformDomain { s: f64, limit: f64 },

    #[error("evaluation point {target} lies outside the computational domain [{a}, {b}]")]
    OutOfDomain { target: f64, a: f64, b: f64 },

    #[error("non-finite value in field at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error("width parameter mu = {mu} left the admissible range mu > 0 at t = {t}")]
    NonPositiveWidth { mu: f64, t: f64 },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
