//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sigma must be > 0, got {0}")]
    NonPositiveSigma(f64),
    #[error("r must be > 0, got {0}")]
    NonPositiveRate(f64),
    #[error("x must be >= 0, got {0}")]
    NegativeWorth(f64),
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("mu_star ({mu_star}) must be >= mu ({mu})")]
    LoanBelowDrift { mu: f64, mu_star: f64 },
    #[error("degenerate drift: mu = {0} <= 0 has no dividend threshold")]
    DegenerateDrift(f64),
    #[error("exponent argument {arg} exceeds the guard {guard}")]
    Overflow { arg: f64, guard: f64 },
    #[error("no sign change of the threshold equation before the exponent guard (upper = {upper})")]
    BracketFailure { upper: f64 },
    #[error("x = {x} outside [0, {barrier}]")]
    Domain { x: f64, barrier: f64 },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by floating point range limits rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Overflow { .. } | Error::BracketFailure { .. })
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
