use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the set where the function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters that make the object ill-defined (poles, bad indices).
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("series did not converge after {terms} terms (partial sum {partial_sum:e}, last term {last_term:e})")]
    SeriesConvergence {
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },

    /// An extrapolated limit whose tail does not stabilize.
    #[error("limit did not stabilize: {0}")]
    LimitConvergence(String),

    #[error("finite-difference step {step:e} exceeds a quarter of the minimum gap {min_gap:e}")]
    StepTooLarge { step: f64, min_gap: f64 },

    #[error("interval classification failed: {0}")]
    Classification(String),

    #[error("bisection failed: {0}")]
    Bisection(String),

    /// Failure inside step `step` of a sequence of limits.
    #[error("limit sequence failed at step {step}: {source}")]
    SequenceStep { step: usize, source: Box<Error> },

    #[error("resource guard: {0}")]
    Resource(String),
}
