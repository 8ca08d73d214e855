use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integrator exceeded {max_steps} steps at X = {at}")]
    StepLimitExceeded { max_steps: usize, at: Complex64 },

    #[error("solution overflowed at X = {at}; rescale before continuing")]
    Overflow { at: Complex64 },

    #[error("step size underflow at X = {at}")]
    StepSizeUnderflow { at: Complex64 },

    #[error("initialization radius {radius} too small (series error estimate {estimate:e})")]
    RadiusTooSmall { radius: f64, estimate: f64 },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("Newton iteration stalled at E = {at}")]
    NewtonStall { at: Complex64 },

    #[error("no convergence after {iterations} iterations (last E = {at})")]
    NoConvergence { iterations: usize, at: Complex64 },

    #[error("zero of C on or near the counting contour")]
    BoundaryZero,

    #[error("argument-principle quadrature too noisy (residual {residual:.3})")]
    QuadratureNoise { residual: f64 },

    #[error("degree {0} not supported by this operation")]
    UnsupportedDegree(usize),

    #[error("E = {e} is not an eigenvalue (|C| = {residual:e})")]
    NotAnEigenvalue { e: Complex64, residual: f64 },

    #[error("spectrum contains a non-simple or non-real level")]
    DegenerateSpectrum,

    #[error("lost track of level {level} after alpha = {last_alpha}")]
    TrackingLost { level: usize, last_alpha: f64 },

    #[error("singular Jacobian in exceptional-point Newton")]
    SingularJacobian,
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidSpec(_) | Error::InvalidArgument(_) | Error::UnsupportedDegree(_)
        )
    }
}
