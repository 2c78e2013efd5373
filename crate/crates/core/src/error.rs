use thiserror::Error;

/// Errors surfaced by problem construction, schedule generation, engine runs,
/// and the verifiers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterate or exchanged value became non-finite, which signals a
    /// mis-scaled instance rather than a schedule problem.
    #[error("non-finite value at iteration {iteration}: {context}")]
    NonFinite { iteration: usize, context: String },

    /// The reference fixed-point solve did not reach its tolerance within the
    /// contraction-derived iteration cap.
    #[error("fixed-point solve did not converge within {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    /// A verifier was asked to certify more than the trace can support.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
