use thiserror::Error;

use crate::model::ValidationReport;

/// Errors produced by the core library.
///
/// Structural problems (bad dimensions, malformed schedules) are kept
/// distinct from model-assumption violations, which travel inside a
/// [`ValidationReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("malformed schedule: {0}")]
    Schedule(String),

    #[error("network validation failed:\n{0}")]
    Validation(Box<ValidationReport>),

    #[error(
        "dominant-eigenvalue iteration did not converge after {iterations} iterations \
         (last estimate {estimate}, residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        estimate: f64,
        residual: f64,
    },

    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
