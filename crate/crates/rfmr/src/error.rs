//! Error type shared by the whole crate.
//!
//! Errors split into two families: *input* errors (malformed vectors,
//! out-of-range options — the caller passed something the model cannot
//! represent) and *numerical* errors (a well-posed computation failed to
//! converge or hit a singular linear system). The CLI maps the first family
//! to exit code 2 and the second to exit code 3; [`Error::is_input_error`]
//! is the single place that decides which is which.

use crate::jacobians::RankCertificate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector needs at least {required} entries, got {got}")]
    TooShort { required: usize, got: usize },

    #[error("operation requires dimension >= {required}, got {got}")]
    DimensionTooSmall { required: usize, got: usize },

    #[error("parameter {index} must be strictly positive and finite, got {value}")]
    NonPositiveParameter { index: usize, value: f64 },

    #[error("state entry {index} = {value} lies outside {range} (tolerance {tol:.3e})")]
    StateOutOfRange {
        index: usize,
        value: f64,
        range: &'static str,
        tol: f64,
    },

    #[error("first integral s = {s} must lie strictly between 0 and n = {n}")]
    InvalidFirstIntegral { s: f64, n: usize },

    #[error("invalid option: {0}")]
    InvalidOptions(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target has boundary entries; every parameter vector is consistent with it, none selects it")]
    BoundaryTarget,

    #[error("state touches the cube boundary without being all-zero or all-one; no positive direction exists")]
    MixedBoundaryState,

    #[error("Newton corrector did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(
        "singular correction matrix: smallest singular value {:.3e} below threshold {:.3e}",
        certificate.smallest_singular_value,
        certificate.threshold
    )]
    SingularMatrix { certificate: Box<RankCertificate> },

    #[error("path tracing stalled at t = {t}: step size fell below {min_step:.3e}")]
    StepUnderflow { t: f64, min_step: f64 },

    #[error("path tracing exceeded {max_steps} predictor steps at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },

    #[error(
        "trajectory left the unit cube at t = {t} (component {index} = {value}); reduce the step size"
    )]
    StateEscaped { t: f64, index: usize, value: f64 },

    #[error("field norm {residual:.3e} still above tolerance {tol:.3e} at t_max = {t_max}")]
    Timeout { t_max: f64, residual: f64, tol: f64 },

    #[error("sampling failed: {0}")]
    SamplingFailed(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a
    /// numerical method failing on well-posed data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::TooShort { .. }
                | Error::DimensionTooSmall { .. }
                | Error::NonPositiveParameter { .. }
                | Error::StateOutOfRange { .. }
                | Error::InvalidFirstIntegral { .. }
                | Error::InvalidOptions(_)
                | Error::InvalidArgument(_)
                | Error::BoundaryTarget
                | Error::MixedBoundaryState
        )
    }

    /// Stable machine-readable tag used in the CLI's JSON error envelope.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::TooShort { .. } => "too_short",
            Error::DimensionTooSmall { .. } => "dimension_too_small",
            Error::NonPositiveParameter { .. } => "non_positive_parameter",
            Error::StateOutOfRange { .. } => "state_out_of_range",
            Error::InvalidFirstIntegral { .. } => "invalid_first_integral",
            Error::InvalidOptions(_) => "invalid_options",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::BoundaryTarget => "boundary_target",
            Error::MixedBoundaryState => "mixed_boundary_state",
            Error::NoConvergence { .. } => "no_convergence",
            Error::SingularMatrix { .. } => "singular_matrix",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::MaxSteps { .. } => "max_steps",
            Error::StateEscaped { .. } => "state_escaped",
            Error::Timeout { .. } => "timeout",
            Error::SamplingFailed(_) => "sampling_failed",
        }
    }
}
