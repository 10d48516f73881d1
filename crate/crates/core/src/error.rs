use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter, bound, or state failed validation.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// A caller broke an operation's contract (shape mismatch, out-of-range input).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(#[from] NumericalFailure),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericalFailure {
    #[error("compartment {compartment} fell to {value:e} at node {node}")]
    NegativeCompartment {
        node: usize,
        compartment: &'static str,
        value: f64,
    },

    #[error("non-finite value produced at node {node}")]
    NonFinite { node: usize },

    #[error("non-finite cost functional at FBS iteration {iteration}")]
    NonFiniteCost { iteration: usize },

    #[error("FBS iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        source: Box<NumericalFailure>,
    },

    #[error("endemic equilibrium search: {0}")]
    RootSearch(String),
}

impl NumericalFailure {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        NumericalFailure::Iteration {
            iteration,
            source: Box::new(self),
        }
    }
}
