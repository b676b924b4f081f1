use thiserror::Error;

use crate::curves::Witness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("curve is not self-contracted: witness {witness}")]
    NotSelfContracted { witness: Witness },

    #[error("curve is not strongly self-contracted: witness {witness}")]
    NotStronglySelfContracted { witness: Witness },

    #[error(
        "hemisphere hypothesis violated by pair ({i}, {j}): dot {dot:.3e} < {threshold:.3e}"
    )]
    HypothesisViolated {
        i: usize,
        j: usize,
        dot: f64,
        threshold: f64,
    },

    #[error("step size {0} outside (0, 1]")]
    StepOutOfRange(f64),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("no proximal solver available: {0}")]
    NoSolver(&'static str),

    #[error("level {level} is not above the infimum {infimum} of the function")]
    LevelBelowInfimum { level: f64, infimum: f64 },

    #[error("no admissible backward vertex from sample {index} within the window")]
    NoAdmissibleVertex { index: usize },

    #[error("zero-length curve")]
    ZeroLength,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
