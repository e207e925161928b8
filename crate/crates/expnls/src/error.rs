use thiserror::Error;

/// Errors produced by grid construction, steppers and the CLI driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: only 1 and 2 are supported")]
    InvalidDimension(usize),

    #[error("non-positive extent: x_right ({xr}) must exceed x_left ({xl})")]
    NonPositiveExtent { xl: f64, xr: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field is already in the requested representation")]
    RepresentationMismatch,

    #[error("contour evaluation point |z| = {0} lies outside the contour radius {1}")]
    OutsideContour(f64, f64),

    #[error("fixed-point iteration did not reach tolerance after {iterations} iterations (step {step}); the time step is probably too large")]
    NoConvergence { step: usize, iterations: usize },

    #[error("fixed-point iterate grew beyond the divergence guard (step {step}); the time step is probably too large")]
    DivergenceGuard { step: usize },

    #[error("final time {t_final} is not an integer multiple of the step size {h}")]
    TimeStepMismatch { t_final: f64, h: f64 },

    #[error("shooting bracket not found in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("shooting did not reach the requested tolerance {0}")]
    ToleranceNotReached(f64),

    #[error("grid period ({grid}) does not match the trap truncation size ({trap}) on axis {axis}")]
    GridTrapMismatch { grid: f64, trap: f64, axis: usize },

    #[error("Thomas-Fermi support reaches outside the cutoff plateau; increase the truncation size")]
    SupportExceedsPlateau,

    #[error("order estimate needs at least 3 points inside the saturation window, got {0}")]
    TooFewPoints(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::TimeStepMismatch { .. } => 2,
            _ => 3,
        }
    }
}
