use thiserror::Error;

/// Errors raised by the special functions, operators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within {terms} terms (last term {last_term:e}, partial sum {value:e})")]
    NotConverged {
        terms: usize,
        last_term: f64,
        value: f64,
    },

    #[error("|z| = {z:e} exceeds the series envelope {limit}")]
    OutsideEnvelope { z: f64, limit: f64 },

    #[error("grid: {0}")]
    Grid(String),

    #[error("psi map rejected: {0}")]
    Psi(String),

    #[error("singular forward-substitution step at node {node}: 1 - w = {pivot:e}")]
    SingularStep { node: usize, pivot: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
