use thiserror::Error;

use crate::expr::ParseError;

/// Failure while evaluating an expression at a point.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at t = {t}")]
    DivisionByZero { t: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid piecewise function: {0}")]
    InvalidPiecewise(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nonpositive interval ({t1}, {t2})")]
    EmptyInterval { t1: f64, t2: f64 },
    #[error("coefficient bound violated at t = {t}: {what}")]
    BoundViolation { t: f64, what: String },
    #[error("horizon covers {windows} windows, at least {required} required")]
    HorizonTooShort { windows: usize, required: usize },
    #[error("certificate is not certified")]
    NotCertified,
    #[error("empty list of coefficient pairs")]
    EmptyPairs,
    #[error("coefficient pairs disagree on tau_max ({0} vs {1})")]
    TauMismatch(f64, f64),
    #[error("delay configuration error at t = {t}: {what}")]
    Delay { t: f64, what: String },
    #[error("integration diverged after t = {last_valid}")]
    Overflow { last_valid: f64 },
    #[error("trajectory grids do not match")]
    GridMismatch,
    #[error("{found} usable samples, at least {required} required")]
    InsufficientSamples { found: usize, required: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
