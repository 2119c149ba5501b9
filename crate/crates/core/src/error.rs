use thiserror::Error;

/// Crate-wide error type. Every fallible operation reports enough context to
/// diagnose the failure without a debugger; none of them panic on bad input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("shape mismatch: expected {expected}, got {got} ({context})")]
    ShapeMismatch {
        expected: String,
        got: String,
        context: &'static str,
    },

    #[error("not enough non-edges: need {needed} negative samples but only {available} node pairs are unlinked")]
    NotEnoughNonEdges { needed: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value produced by `{0}`")]
    NonFinite(&'static str),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("target {0:?} has no ground truth: {1}")]
    RefusedTarget((usize, usize), String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
