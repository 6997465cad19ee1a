use thiserror::Error;

/// Errors produced by the model, solvers and simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("node {rx} has no signal to evaluate: its partner is not transmitting")]
    PartnerSilent { rx: usize },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("{what} requires alpha = 4 (got alpha = {alpha})")]
    RequiresAlpha4 { what: &'static str, alpha: f64 },

    #[error("{what} is singular at p = 1; use the quadrature variant for the limit")]
    SingularAtOne { what: &'static str },

    #[error("closed-form quadratic has no real root (discriminant {0:e})")]
    NegativeDiscriminant(f64),

    #[error("closed-form quadratic has no positive root (root {0:e})")]
    NoPositiveRoot(f64),

    #[error("unknown access scheme `{0}`")]
    UnknownScheme(String),

    #[error("{0}")]
    Config(String),

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
