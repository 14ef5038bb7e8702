use thiserror::Error;

use crate::pulse::fit::FitFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not Hermitian (max |H - H^dagger| = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("no oscillation detected in trace")]
    NoOscillation,

    #[error("time grid is not uniform (step deviation {deviation:.3e} us)")]
    NonUniformGrid { deviation: f64 },

    #[error("no population transfer: drive does not move population out of |+-3/2>")]
    NoTransfer,

    #[error("malformed pulse sequence: {0}")]
    MalformedSequence(String),

    #[error("infrared divergence: noise spectrum too singular at zero frequency for this filter")]
    InfraredDivergence,

    #[error("fit failed: {0}")]
    FitFailed(Box<FitFailure>),

    #[error("master-equation integration failed: {0}")]
    IntegrationFailure(String),

    #[error("steady state is not unique (kernel dimension {dimension})")]
    NonUniqueSteadyState { dimension: usize },

    #[error("calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("Debye-Waller factor undefined: total integrated intensity is zero")]
    UndefinedDwf,

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
