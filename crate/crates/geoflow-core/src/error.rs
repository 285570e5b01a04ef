//! Error types shared by the solvers and diagnostics.

use thiserror::Error;

/// Failures raised while constructing or validating problem data.
#[derive(Debug, Error)]
pub enum InvalidInput {
    #[error("contact angle {name} = {value} is outside the open interval (0, pi)")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("grid size {n} is invalid: need an even n >= {min}")]
    BadGridSize { n: usize, min: usize },

    #[error("curvature profile has {len} samples but the grid needs {expected}")]
    GridMismatch { len: usize, expected: usize },

    #[error("curvature must stay below -{floor:.3e}; sample {index} is {value:.6e}")]
    NotConcave {
        index: usize,
        value: f64,
        floor: f64,
    },

    #[error("value {name} = {value} is not finite")]
    NotFinite { name: &'static str, value: f64 },

    #[error("{what}")]
    Unusable { what: String },
}

/// Failures raised while a solver is running.
#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Input(#[from] InvalidInput),

    #[error("curvature lost concavity at t = {t:.6e} (node {index}, value {value:.6e})")]
    ConcavityLost { t: f64, index: usize, value: f64 },

    #[error("state became non-finite at t = {t:.6e}")]
    Diverged { t: f64 },

    #[error("boundary closure did not converge at t = {t:.6e} (length change {delta:.3e})")]
    BoundaryStall { t: f64, delta: f64 },

    #[error("time step underflow at t = {t:.6e}: dt = {dt:.3e}")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("grid too coarse for contact angle: cot(psi) = {cot:.3e} exceeds 3/(2h) = {limit:.3e}")]
    BoundaryIllPosed { cot: f64, limit: f64 },
}
