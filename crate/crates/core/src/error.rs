use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("requested size {requested} exceeds the supported limit {limit}")]
    Size { requested: usize, limit: usize },

    #[error("tilted law is not normalized: |sum - 1| = {residual:.3e}")]
    InconsistentTilt { residual: f64 },

    #[error("insufficient data: need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("phase error: {0}")]
    Phase(String),

    #[error("accuracy error in {what}: achieved {achieved:.3e}, requested {requested:.3e}")]
    Accuracy {
        what: String,
        achieved: f64,
        requested: f64,
    },

    #[error("rejection budget of {budget} attempts exhausted for {what}; increase the budget")]
    Feasibility { what: String, budget: u64 },

    #[error("decomposition failure: {0}")]
    Decomposition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
