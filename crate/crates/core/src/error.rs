use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("all torsion vanishes; normalization unavailable")]
    FlatTorsion,
    #[error("normalizer l{p}{q} vanishes at the box center", p = .pair.0 + 1, q = .pair.1 + 1)]
    DegenerateNormalizer { pair: (usize, usize) },
    #[error("structure function sparsity violated: {0}")]
    Sparsity(String),
    #[error("point {point:?} is not interior to the box with margin {margin}")]
    OutsideBox { point: Vec<f64>, margin: f64 },
    #[error("web map is not block diagonal: {0}")]
    NotBlockDiagonal(String),
    #[error("pushforward leaves the autonomous class: phi0' = {0} is not constant")]
    NonAutonomousResult(String),
    #[error("web map component {component} is not invertible on the box: {reason}")]
    InversionFailure { component: usize, reason: String },
    #[error("normalizer vanishes at {skipped} of {total} sample points")]
    IllConditionedNormalizer { skipped: usize, total: usize },
    #[error("normalizer policy mismatch: l{} vs l{}", pair_label(.a), pair_label(.b))]
    PolicyMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("only {evaluable} probe points were evaluable; at least {required} required")]
    InsufficientProbes { evaluable: usize, required: usize },
    #[error("1/f and 1/F have opposite signs at the anchor; no monotone map exists")]
    SignMismatch,
    #[error("right-hand side vanishes or changes sign on the interval: {0}")]
    Vanishing(String),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
}

pub(crate) fn pair_label(pair: &(usize, usize)) -> String {
    format!("{}{}", pair.0 + 1, pair.1 + 1)
}
