use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("bracket failure: upper bracket exceeded {limit}")]
    BracketFailure { limit: f64 },

    #[error("complex spectrum (discriminant {discriminant:e})")]
    ComplexSpectrum { discriminant: f64 },

    #[error("quadrature did not converge (achieved relative tolerance {achieved:e})")]
    QuadratureNonConvergence { achieved: f64 },

    #[error("step size collapsed at t = {t} (state left the positive cone)")]
    StepCollapse { t: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
