use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeconvError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cutoff {cutoff} exceeds the frequency grid half-width {t_max}")]
    CutoffBeyondGrid { cutoff: f64, t_max: f64 },

    #[error("functions live on different frequency grids")]
    GridMismatch,

    #[error("x-grid must be strictly positive and strictly increasing (offending index {0})")]
    BadXGrid(usize),

    #[error("sample must not be empty")]
    EmptySample,

    #[error("sample value {value} at index {index} is not strictly positive and finite")]
    NonPositiveObservation { index: usize, value: f64 },

    #[error("moment E[X^({exponent})] does not exist for {family}")]
    MomentDomain { family: &'static str, exponent: f64 },

    #[error("survival estimation requires c > 1, got c = {0}")]
    SurvivalNeedsCAboveOne(f64),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("quadrature did not converge (estimated error {error:e})")]
    QuadratureNonConvergence { error: f64 },
}

pub type Result<T> = std::result::Result<T, DeconvError>;
