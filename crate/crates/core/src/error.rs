use thiserror::Error;

/// Errors raised by the spectral, kernel and norm routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be even and at least 4")]
    InvalidGridSize(usize),
    #[error("domain scale {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("lattice index ({0}, {1}, {2}) out of range")]
    IndexOutOfRange(usize, usize, usize),
    #[error("field length {found} does not match grid ({expected} samples)")]
    SizeMismatch { expected: usize, found: usize },
    #[error("operation is undefined at the zero wavevector")]
    ZeroWavevector,
    #[error("time {0} must be non-negative")]
    NegativeTime(f64),
    #[error("step {0} must be positive")]
    NonPositiveStep(f64),
    #[error("viscosity {0} must be positive")]
    InvalidViscosity(f64),
    #[error("exponent {0} outside the admissible range")]
    InvalidExponent(f64),
    #[error("field contains non-finite amplitudes")]
    NonFinite,
    #[error("field carries energy {0:e} beyond the dealiasing cutoff")]
    Aliasing(f64),
    #[error("region parameter delta = {0} must lie in (0, 1)")]
    InvalidDelta(f64),
    #[error("empty parameter list")]
    EmptyList,
    #[error("values must be positive and strictly increasing")]
    NotIncreasing,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
