use thiserror::Error;

/// Failure modes of the solvers and validators.
///
/// Numeric payloads are widened to `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("running integral of |R(t)| failed the Cauchy test (tail increment {increment:e})")]
    Divergence { increment: f64 },

    #[error("propagator unitarity drift {drift:e} at t = {t}")]
    UnitarityDrift { t: f64, drift: f64 },

    #[error("density matrix lost positivity at t = {t}: min eigenvalue {eigenvalue:e}")]
    Positivity { t: f64, eigenvalue: f64 },

    #[error("density matrix trace drifted to {trace} at t = {t}")]
    TraceDrift { t: f64, trace: f64 },

    #[error("propagator sampled at t = {propagator_t} used for jump operators at t = {t}")]
    TimestampMismatch { t: f64, propagator_t: f64 },

    #[error("expansion singular at drive ratio {drive_ratio} (resonance with the gap)")]
    Resonance { drive_ratio: f64 },

    #[error("solver configuration mismatch: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
