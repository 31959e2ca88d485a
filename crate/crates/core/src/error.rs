use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("run {run_id}: {reason}")]
    InvalidRecord { run_id: String, reason: String },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("no groups formed")]
    NoGroups,

    #[error("no valley: parabola curvature {curvature} is not positive")]
    NoValley { curvature: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("raise e_hi: loss still decreasing at e = {e_hi}")]
    RaiseUpperBound { e_hi: f64 },

    #[error("all {starts} fit starts diverged (best objective {best_objective})")]
    FitDiverged { starts: usize, best_objective: f64 },

    #[error("mask id {mask_id} collides with a token in the batch")]
    MaskCollision { mask_id: u32 },

    #[error("unknown coefficient set `{name}` (available: {available})")]
    UnknownCoefficients { name: String, available: &'static str },

    #[error("{0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }
}
