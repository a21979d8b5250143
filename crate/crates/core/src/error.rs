use thiserror::Error;

/// Errors produced by the distribution functions and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TsnError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid truncation window [{lower}, {upper}]")]
    InvalidWindow { lower: f64, upper: f64 },

    #[error("degenerate truncation window: retained mass {mass:e} is below the floor")]
    DegenerateWindow { mass: f64 },

    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),

    #[error("observation {value} at index {index} lies outside the truncation window")]
    DataOutsideWindow { index: usize, value: f64 },

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {error:e})")]
    QuadratureNotConverged { subdivisions: usize, error: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(&'static str),

    #[error("sample variance is zero")]
    DegenerateVariance,

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = TsnError> = std::result::Result<T, E>;
