use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported Mellin derivative order {0} (supported: 1, 2)")]
    UnsupportedOrder(u32),

    #[error("non-finite value encountered at log-coordinate {log_x}")]
    NumericDomain { log_x: f64 },

    #[error("quadrature tolerance {tolerance:e} not met (error estimate {estimate:e} after {subdivisions} subdivisions)")]
    ToleranceNotMet {
        tolerance: f64,
        estimate: f64,
        subdivisions: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("test function `{id}` has no analytic Mellin derivative of order {order}")]
    MissingAnalyticDerivative { id: String, order: u32 },

    #[error("kernel condition violated: {0}")]
    ConditionViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series truncation needs {needed} terms, budget is {budget}")]
    TruncationBudget { needed: u64, budget: u64 },

    #[error("insufficient data for a rate fit: {0}")]
    InsufficientData(String),

    #[error("all errors are at the numeric floor ({floor:e}); no rate can be fitted")]
    AtNumericFloor { floor: f64 },

    #[error("direct bound violated at w = {w}: sup error {error:e} exceeds bound {bound:e}")]
    BoundViolated { w: f64, error: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks a sampled value, mapping NaN/inf to [`Error::NumericDomain`].
pub(crate) fn finite(value: f64, log_x: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NumericDomain { log_x })
    }
}
