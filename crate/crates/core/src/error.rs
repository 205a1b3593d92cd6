use thiserror::Error;

use crate::varsolve::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid integration domain [{a}, {b}]")]
    InvalidDomain { a: f64, b: f64 },

    #[error("quadrature did not converge: value {value}, error estimate {error_estimate} after {subdivisions} subdivisions")]
    NonConvergent {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("beta0 = {beta0} is at or below the threshold {threshold}; the majorant diverges")]
    BelowThreshold { beta0: f64, threshold: f64 },

    #[error("beta = {beta} is at or above the threshold {threshold}")]
    AboveThreshold { beta: f64, threshold: f64 },

    #[error("function takes a negative value {value} at node {index}")]
    NegativeValues { index: usize, value: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("solver did not converge (constraint residual {})", .0.constraint_residual)]
    NotConverged(Box<SolveReport>),

    #[error("ODE integrator step size underflow at r = {r}")]
    StepFailure { r: f64 },

    #[error("slope reached zero at r = {r}")]
    SlopeSingularity { r: f64 },

    #[error("disk data inadmissible: mass {a} is below the minimum {min}")]
    Inadmissible { a: f64, min: f64 },

    #[error("point coincides with the north pole")]
    PoleSingularity,

    #[error("function does not vanish on the excluded polar cap (u({t}) = {value})")]
    SupportViolation { t: f64, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDomain { .. } => "invalid_domain",
            Error::NonConvergent { .. } => "non_convergent",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidParam(_) => "invalid_param",
            Error::BelowThreshold { .. } => "below_threshold",
            Error::AboveThreshold { .. } => "above_threshold",
            Error::NegativeValues { .. } => "negative_values",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::NotConverged(_) => "not_converged",
            Error::StepFailure { .. } => "step_failure",
            Error::SlopeSingularity { .. } => "slope_singularity",
            Error::Inadmissible { .. } => "inadmissible",
            Error::PoleSingularity => "pole_singularity",
            Error::SupportViolation { .. } => "support_violation",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}
