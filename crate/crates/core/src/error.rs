//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A bind produced a term deeper than the carrier bound. The caller
    /// must rebuild the monad with a larger bound.
    #[error("term of depth {depth} exceeds the carrier bound {bound}")]
    DepthExceeded { depth: usize, bound: usize },

    /// The supplied normal-form function is not idempotent on the bounded
    /// term universe.
    #[error("normalizer is not idempotent on `{term}`")]
    NormalizerUnsound { term: String },

    /// A theory equation fails at a concrete comodel state.
    #[error("equation `{equation}` violated at state {state}")]
    EquationViolated { equation: String, state: usize },

    /// Exhaustive enumeration would exceed the configured cap.
    #[error("search space of {size} candidates exceeds the cap {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },

    /// A composite fell outside a bounded carrier; checks treat this like
    /// `DepthExceeded` (skip, do not fail).
    #[error("truncated by a bounded carrier: {0}")]
    Truncated(String),

    /// The monad has no canonical runner.
    #[error("no canonical comodel is defined for `{monad}`")]
    Unsupported { monad: String },

    /// Trace strings are only defined for equation-free theories.
    #[error("`{monad}` is not a free theory")]
    TheoryNotFree { monad: String },

    /// A constructed category failed its own law suite, which signals that
    /// the closure bounds were too small. Never repaired silently.
    #[error("category law violated: {0}")]
    CategoryLawViolation(String),

    /// The congruence closure and the pointwise trace relation disagree.
    #[error("congruence/trace mismatch: {0}")]
    BoundMismatch(String),

    /// Trace classes at the current bound are coarser than the category
    /// morphisms they should witness.
    #[error("trace classes too coarse at arity bound {bound}: {detail}")]
    BoundInsufficient { bound: usize, detail: String },

    /// A structural axiom failed with a witness.
    #[error("axiom violated: {0}")]
    AxiomViolation(String),

    #[error("index {index} out of range for {what}")]
    OutOfRange { index: usize, what: String },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
