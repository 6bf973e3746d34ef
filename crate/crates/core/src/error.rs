//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by domain validation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("factorial ratio requires n_lo <= n_hi, got n_lo = {n_lo}, n_hi = {n_hi}")]
    FactorialOrder { n_lo: usize, n_hi: usize },

    #[error("magic condition requires k < m, got k = {k}, m = {m}")]
    MagicOrder { k: usize, m: usize },

    #[error("not a magic operating point: {0}")]
    NotMagic(String),

    #[error("Raman detuning must be nonzero")]
    ZeroDetuning,

    #[error("effective wavevector must be nonzero (the gate requires motional coupling)")]
    ZeroWavevector,

    #[error("micromotion correction requires omega_rf > omega, got omega = {omega}, omega_rf = {omega_rf}")]
    RfFrequencyOrder { omega: f64, omega_rf: f64 },

    #[error("expected a {expected} pulse, got sideband order {got}")]
    WrongSideband { expected: &'static str, got: i32 },

    #[error("target ion {ion} out of range for {n_ions} ion(s)")]
    IonOutOfRange { ion: usize, n_ions: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary: max |U^dag U - I| = {max_deviation:.3e}")]
    NotUnitary { max_deviation: f64 },

    #[error("integrator failed to converge: step halving changed entries by {max_delta:.3e}")]
    NonConvergence { max_delta: f64 },

    #[error("unknown basis label: {0:?}")]
    UnknownLabel(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("state vector has zero (or non-finite) norm")]
    ZeroNorm,

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
        if !value.is_finite() {
            Err(Error::NonFinite { name, value })
        } else if value <= 0.0 {
            Err(Error::NonPositive { name, value })
        } else {
            Ok(value)
        }
    }

    pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<f64> {
        if !value.is_finite() {
            Err(Error::NonFinite { name, value })
        } else if value < 0.0 {
            Err(Error::Negative { name, value })
        } else {
            Ok(value)
        }
    }
}
