use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value lies outside the domain of the model (negative tension, zero
    /// spines, non-positive length, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant of a domain type was violated on construction.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("index {index} out of range 0..={max}")]
    Index { index: usize, max: usize },

    /// `μ·tan β ≥ 1`: the asperity locks the spine and the effective
    /// friction coefficient is unbounded.
    #[error("self-locking asperity: mu * tan(beta) = {0} >= 1")]
    SelfLocking(f64),

    /// The tether would have to push (finger displaced past the plate).
    #[error("state error: {0}")]
    State(String),
}
