use thiserror::Error;

/// Unified error type for the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("argument out of range for the unscaled Airy path: x = {x} (use the scaled evaluation above 25)")]
    Overflow { x: f64 },

    #[error("non-finite {what}")]
    NonFinite { what: &'static str },

    #[error("{what} out of domain: {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("energy e = {e} is not inside a spectral band")]
    OutOfBand { e: f64 },

    #[error("energy e = {e} is within the guard distance of the band edge at {edge}")]
    EdgeGuard { e: f64, edge: f64 },

    #[error("asymptotic radicand is negative at e = {e} (value {value}); the simplified phase form does not apply here")]
    NegativeRadicand { e: f64, value: f64 },

    #[error("division by a value within 1e-14 of zero in {what}")]
    NearZeroDivision { what: &'static str },

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error(
        "band scan failed after {retries} step halvings (step {step}): inconsistent edge pattern"
    )]
    ScanFailure { step: f64, retries: u32 },

    #[error("requested precision not achievable within the iteration cap ({what})")]
    IterationCap { what: &'static str },

    #[error("energy e = {e} is outside the coverage of the band table")]
    TableCoverage { e: f64 },

    #[error("extrapolation did not converge in {what}: discrepancy {value}")]
    NonConvergent { what: &'static str, value: f64 },

    #[error("transfer-matrix and finite-difference eigenvalue counts disagree by more than one level: {detail}")]
    OracleMismatch { detail: String },

    #[error("fit needs at least {need} usable points, found {found}")]
    TooFewFitPoints { found: usize, need: usize },

    #[error("invalid configuration: {what}")]
    InvalidConfig { what: String },
}
