use thiserror::Error;

use crate::infotheory::CapacityResult;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("input distribution is not interior (min entry {min} < {margin})")]
    NotInterior { min: f64, margin: f64 },
    #[error("channel has zero capacity ({0})")]
    ZeroCapacity(&'static str),
    #[error("Blahut-Arimoto did not reach gap {tol} within {iterations} iterations")]
    NotConverged { tol: f64, iterations: usize, best: Box<CapacityResult> },
    #[error("no feasible pair found: {0}")]
    NoFeasiblePair(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("G0 is not invertible: flat on [{from}, {to}]")]
    NotInvertible { from: f64, to: f64 },
    #[error("curve is not a domination function: I(U;Y1) = {iuy1} < G(I(U;Y2)) = {bound}")]
    NotDominating { iuy1: f64, bound: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
