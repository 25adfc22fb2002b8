use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::jet::JetError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error in {context}: {source}")]
    Parse {
        context: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point {0:?} is outside the domain cone")]
    OutsideDomain(Vec<f64>),
    #[error("degenerate Hessian: |det g| = {det:e} below threshold {threshold:e}")]
    DegenerateHessian { det: f64, threshold: f64 },
    #[error("singular vierbein: |det e| = {det:e} below threshold {threshold:e}")]
    SingularVierbein { det: f64, threshold: f64 },
    #[error("L vanishes at the fiber point, the indicatrix projector is undefined")]
    NullDirection,
    #[error("{0} requires a quadratic norm")]
    NotQuadratic(&'static str),
    #[error("unsupported form {0}; expected 1, 2 or 3")]
    InvalidForm(u8),
}

pub type Result<T> = std::result::Result<T, Error>;
