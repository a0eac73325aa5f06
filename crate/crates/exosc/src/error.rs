use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter failed its construction-time validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Raw vector field requested with an exponent beyond the overflow guard.
    #[error("overflow guard: exponent magnitude {0} exceeds {1}; use the normalized field")]
    OverflowGuard(f64, f64),
    /// The piecewise-smooth field is undefined on the switching manifold y = 0.
    #[error("piecewise-smooth field is degenerate on the switching manifold y = 0")]
    OnSwitchingManifold,
    /// An existence condition of the underlying theorem is violated.
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("integration exceeded max_steps = {0}")]
    MaxStepsExceeded(usize),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("empty input")]
    EmptyInput,
    #[error("empty window: no trajectory samples inside the requested x-interval")]
    EmptyWindow,
    #[error("argument outside the function domain: {0}")]
    DomainError(String),
    #[error("point outside the supported domain: {0}")]
    OutOfDomain(String),
    /// No return to the section within the time budget.
    #[error("no return to the section within t1 budget {0}")]
    NoReturn(f64),
    #[error("fixed-point iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("chart point invalid: {0}")]
    InvalidChartPoint(String),
    #[error("point outside the overlap domain of the transition: {0}")]
    OutsideOverlap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
