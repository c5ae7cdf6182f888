//! Error type shared by all modules.

use thiserror::Error;

/// Why an inductive step could not refine the current block structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoProgressReason {
    /// Every block already has size one; there is nothing left to split.
    AlreadyDiagonal,
    /// No centralizer finder produced a witness that splits a block.
    FinderFailed(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("representation kind mismatch (exact sets hold monomial elements, tolerant sets dense)")]
    KindMismatch,

    #[error("equality regime mismatch between operand sets")]
    RegimeMismatch,

    #[error("matrix is not unitary within tolerance: residual {residual:.3e} > {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("matrix is not special unitary within tolerance: |det - 1| = {residual:.3e}")]
    NotSpecialUnitary { residual: f64 },

    #[error("numerical breakdown in {0}")]
    NumericalBreakdown(String),

    #[error("size cap exceeded: reached {partial} with cap {cap}")]
    CapExceeded { partial: usize, cap: usize },

    #[error("set is not symmetric: element {index} has no inverse in the set")]
    NotSymmetric { index: usize },

    #[error("set does not contain the identity")]
    MissingIdentity,

    #[error("set is not closed under multiplication")]
    NotClosed,

    #[error("recursion depth cap {0} exceeded")]
    DepthCapExceeded(usize),

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("input is a scalar multiple of the identity")]
    ScalarInput,

    #[error("set too small: |A| = {size} <= n = {dim}")]
    TooSmall { size: usize, dim: usize },

    #[error("fiber search degenerated: {0}")]
    NoWitness(String),

    #[error("near-identity subset is empty after scalar removal")]
    EmptyNearIdentity,

    #[error("operation requires an exact-mode (monomial) set")]
    NotExactMode,

    #[error("inductive step made no progress: {0:?}")]
    NoProgress(NoProgressReason),

    #[error("decomposition pipeline failed at level {level}: {reason}")]
    PipelineFailed { level: usize, reason: String },

    #[error("normalizer violation: element {index} does not normalize the torus (residual {residual:.3e})")]
    NormalizerViolation { index: usize, residual: f64 },

    #[error("conjugator {index} is not unitary")]
    NonUnitaryConjugator { index: usize },

    #[error("growth profile is degenerate (constant sizes)")]
    DegenerateProfile,

    #[error("invalid family spec: {0}")]
    InvalidSpec(String),

    #[error("phase arithmetic overflow")]
    PhaseOverflow,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
