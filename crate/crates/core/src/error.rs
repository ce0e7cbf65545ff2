use thiserror::Error;

/// Errors raised by the estimation and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "subcritical sample size: n = {n} gives N = ln(n)/(2*gamma) = {big_n:.6} <= 1 for gamma = {gamma}; \
         need n >= {min_n}"
    )]
    SubcriticalSampleSize {
        n: u64,
        gamma: f64,
        big_n: f64,
        min_n: u64,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge{}: estimate {value:e}, error {error:e} after {intervals} subintervals",
        match .at { Some(x) => format!(" at x = {x}"), None => String::new() })]
    Quadrature {
        value: f64,
        error: f64,
        intervals: usize,
        at: Option<f64>,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("class violation: {0}")]
    ClassViolation(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
