use thiserror::Error;

use crate::numerics::NumericsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mixture weights: {0}")]
    Weight(String),

    #[error("invalid marginal: {0}")]
    Marginal(String),

    #[error("no interval with strictly positive QDE curve found for alpha = {alpha}")]
    NoPositiveInterval { alpha: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate ratio at v = {v}: |C0(v) - C1(v)| = {gap:e}")]
    DegenerateRatio { v: f64, gap: f64 },

    #[error("support exceeds the bounding box: {0}")]
    BoxViolation(String),

    #[error("conditional inversion failed at v = {v}, w = {w}: {reason}")]
    InversionFailure { v: f64, w: f64, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
