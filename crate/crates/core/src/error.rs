use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate metric at ({u}, {v}): EG - F^2 = {det:e}")]
    DegenerateMetric { u: f64, v: f64, det: f64 },

    #[error("umbilic point near ({u}, {v}): max(|L|,|M|,|N|) = {magnitude:e}")]
    Umbilic { u: f64, v: f64, magnitude: f64 },

    #[error("branch selection is ambiguous: both principal directions make the same angle with the previous direction")]
    AmbiguousBranch,

    #[error("point lies within {distance:e} of the projection pole")]
    PoleProximity { distance: f64 },

    #[error("step size collapsed to {step:e} at t = {t}")]
    StepCollapse { t: f64, step: f64 },

    #[error("integration exceeded {max_steps} steps without meeting the stop condition")]
    TooManySteps { max_steps: usize },

    #[error("section crossing is not bracketed by the step")]
    NoBracket,

    #[error("orbit meets the section tangentially (transverse margin {margin:e})")]
    Tangency { margin: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
