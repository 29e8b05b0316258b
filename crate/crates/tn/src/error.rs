use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] driven_lindblad::Error),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("mode {mode} (w = {frequency}) loses Gibbs weight {lost:e} at d = {dim}; tolerance {tolerance:e} (increase d_j)")]
    GibbsTruncation { mode: usize, frequency: f64, dim: usize, lost: f64, tolerance: f64 },

    #[error("truncation renormalized the state by {renormalization:e} at t = {t} (limit {limit:e}); max bond {max_bond}, last discarded weight {discarded:e}")]
    Truncation { t: f64, renormalization: f64, limit: f64, max_bond: usize, discarded: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
