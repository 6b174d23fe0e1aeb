use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("pole of {func} at {at}")]
    Pole { func: &'static str, at: f64 },

    #[error("{what} did not converge after {iterations} iterations (last error estimate {estimate:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("partition order {n} exceeds the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("simulation window radius {radius} m is below the truncation guard {minimum} m")]
    InvalidWindow { radius: f64, minimum: f64 },

    #[error("curvature {curvature:e} at ϖ = {at} is too flat for a Newton step")]
    ZeroCurvature { at: f64, curvature: f64 },

    #[error("coverage probability {value} left the unit interval")]
    OutOfRange { value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Bad input rather than a failure while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidWindow { .. }
        )
    }

    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
