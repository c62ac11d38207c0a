use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum RdsError {
    #[error("kernel exceeds period: {taps} taps on a periodic axis of {size} points")]
    KernelExceedsPeriod { taps: usize, size: usize },

    #[error("kernel length must be odd, got {0}")]
    EvenKernel(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported spline degree {0} (supported: 0, 1, 3)")]
    UnsupportedDegree(u8),

    #[error("Hessian undefined for piecewise-constant splines")]
    HessianUndefined,

    #[error("sample out of domain: sample {index} at coordinate {coord} on axis {axis}")]
    SampleOutOfDomain { index: usize, axis: usize, coord: f64 },

    #[error("density overflow; rescale coefficients or domain")]
    DensityOverflow,

    #[error("degenerate measure: E(rho) = 0")]
    DegenerateMeasure,

    #[error("invalid sensitivity: {0}")]
    InvalidSensitivity(String),

    #[error("zero sensitivity at sample {0}")]
    ZeroSensitivity(usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed file at {location}: {message}")]
    Format { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RdsError {
    pub(crate) fn format(location: impl Into<String>, message: impl Into<String>) -> Self {
        RdsError::Format { location: location.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, RdsError>;
