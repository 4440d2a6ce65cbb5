use thiserror::Error;

use crate::vfexpr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("metric entries g{i}{j} and g{j}{i} differ")]
    AsymmetricMetric { i: usize, j: usize },
    #[error("metric is singular at {x:?} (det = {det:e})")]
    SingularMetric { x: Vec<f64>, det: f64 },
    #[error("metric signature at {x:?} is ({found_pos},{found_neg}), declared ({expected_pos},{expected_neg})")]
    SignatureMismatch {
        x: Vec<f64>,
        expected_pos: usize,
        expected_neg: usize,
        found_pos: usize,
        found_neg: usize,
    },
    #[error("empty sample")]
    EmptySample,
    #[error("conformal factor H0 + f = {factor:e} is degenerate at {x:?}")]
    DegenerateConformalFactor { x: Vec<f64>, factor: f64 },
    #[error("operation `{op}` is not defined for system {kind}")]
    UnsupportedSystem { kind: &'static str, op: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step size underflow at t = {t} (dt = {dt:e})")]
    StepSizeUnderflow { t: f64, dt: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("step limit of {steps} reached at t = {t}")]
    StepLimit { t: f64, steps: usize },
    #[error("evaluation failed at t = {t}: {source}")]
    DomainAt { t: f64, source: ExprError },
    #[error("velocity vanishes at t = {t}; reparametrization undefined")]
    VanishingVelocity { t: f64 },
    #[error("two-form is degenerate (det = {det:e})")]
    DegenerateForm { det: f64 },
    #[error("chaos threshold undefined: sigma - b - 1 = 0")]
    ThresholdUndefined,
}
