use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input is malformed at a specific (1-based) line.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Ω = 0; the quantity asked for is not defined or not needed.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("capacity exceeded: N = {n} is above the enumeration cap {max_n}")]
    Capacity { n: usize, max_n: usize },

    #[error("certification failed: measured defect {defect:e} exceeds {tolerance:e}")]
    Certification { defect: f64, tolerance: f64 },

    #[error("no admissible beta: ||Omega||_inf / k = {ratio} exceeds 1")]
    EmptyRange { ratio: f64 },

    #[error("order band undefined: k = {k} is below 2*sigma = {two_sigma}")]
    BandUndefined { k: f64, two_sigma: f64 },

    #[error("integration diverged after t = {last_time}")]
    Divergence { last_time: f64 },
}
