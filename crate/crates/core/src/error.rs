use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not an element of se(3): {0}")]
    NonSe3Matrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point X = {point} lies outside the rod [0, {length}]")]
    PointOutsideRod { point: f64, length: f64 },

    #[error("generalized mass matrix is not positive definite")]
    SingularMass,

    #[error("setpoint mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("step size underflow at t = {t}: h = {h} (h_min = {h_min}), error ratio {error_ratio}")]
    StepUnderflow {
        t: f64,
        h: f64,
        h_min: f64,
        error_ratio: f64,
    },

    #[error("non-finite state at t = {t}: {details}")]
    NonFinite { t: f64, details: String },

    #[error("steady-state window {window} s is longer than the trajectory ({span} s)")]
    WindowTooLong { window: f64, span: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("static equilibrium did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
