use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("need at least {needed} points, pattern has {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("index {index} out of range for pattern of {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("point ({x}, {y}) lies outside the window")]
    PointOutsideWindow { x: f64, y: f64 },

    #[error(
        "rejection sampling in cell {cell} failed after {attempts} attempts (site at ({x}, {y}))"
    )]
    SamplingFailure {
        cell: usize,
        attempts: u64,
        x: f64,
        y: f64,
    },

    #[error("pattern still empty after {attempts} regenerations; expected point count too small")]
    RegenerationLimit { attempts: u32 },

    #[error("user served by station {expected} but its nearest retained station is {found}")]
    ServingMismatch { expected: usize, found: usize },

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {intervals} intervals")]
    QuadratureFailure {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("threshold list must be non-empty, positive and ascending")]
    InvalidThresholds,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
