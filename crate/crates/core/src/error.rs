use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid dimensions n={n}, q={qcount}: both must be positive")]
    InvalidDimensions { n: usize, qcount: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {index} of the point is not finite")]
    NonFinitePoint { index: usize },
    #[error("inconsistent Hamiltonian system (residual {residual:.3e}): {reason}")]
    InconsistentSystem { residual: f64, reason: String },
    #[error("singular Lagrangian at {point:?}: det W = {det:e}")]
    SingularLagrangian { point: Vec<f64>, det: f64 },
    #[error("step size underflow at t={t} (h={step:e})")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("step limit of {steps} reached at t={t}")]
    StepLimit { t: f64, steps: usize },
    #[error("non-finite state at t={t}")]
    NonFiniteState { t: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("curve is not an extremal: max Herglotz residual {max_residual:.3e}")]
    NotAnExtremal { max_residual: f64 },
    #[error("energy is not positive at t={t} (E={energy:e})")]
    NonPositiveEnergy { t: f64, energy: f64 },
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("{location}: {message}")]
    Config { location: String, message: String },
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
