use thiserror::Error;

/// Failures raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OutageError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series expansion for {m}x{n} exceeds the configured cap (m*n <= {cap})")]
    SeriesTooLarge { m: u32, n: u32, cap: u32 },

    #[error("series expansion failed its reconstruction check: {0}")]
    SeriesGate(String),

    /// The closed-form sum lost too many digits to cancellation; use the
    /// quadrature path instead.
    #[error("cancellation ratio {guard:.3e} exceeds the usable limit; fall back to quadrature")]
    NumericalQuality { guard: f64 },

    #[error("quadrature did not reach tolerance (estimate {estimate:.6e}, error {error:.3e})")]
    Accuracy { estimate: f64, error: f64 },

    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, OutageError>;
