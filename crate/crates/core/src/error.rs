use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A standing-wave family does not exist at these parameters.
    #[error("inadmissible parameters: need omega > alpha^2/(N-2j)^2 = {bound} for j = {j}, got omega = {omega}")]
    Admissibility { j: usize, omega: f64, bound: f64 },

    /// The input violates a structural precondition (vertex continuity, ordering, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("linear solver failed after {iterations} refinement steps (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("blow-up detected at t = {time}: sup norm {sup_norm:e}")]
    BlowUp { time: f64, sup_norm: f64 },

    #[error("eigen-solve inconclusive: {0}")]
    Inconclusive(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, message: msg.into() }
    }

    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Solver { .. } | Error::BlowUp { .. } | Error::Inconclusive(_))
    }
}
