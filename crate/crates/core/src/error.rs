use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("outside the validity regime: {0}")]
    Regime(String),

    #[error("integrator step {dt} exceeds the maximum {max} (100 steps per fastest period)")]
    StepSize { dt: f64, max: f64 },

    #[error("infeasible Gaussian observables: {0}")]
    Infeasible(String),

    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
