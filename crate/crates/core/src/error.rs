//! Crate-wide error type.

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("duplicate annotation for item `{item_id}` by annotator `{annotator_id}`")]
    DuplicateAnnotation {
        item_id: String,
        annotator_id: String,
    },

    #[error("unknown label `{label}` (vocabulary is fixed)")]
    UnknownLabel { label: String },

    #[error("input `{path}` contains no annotation records")]
    EmptyInput { path: String },

    #[error("item `{item_id}` has no votes")]
    EmptyItem { item_id: String },

    #[error("label vocabulary needs at least 2 labels, got {count}")]
    InvalidVocabulary { count: usize },

    #[error("not a probability distribution: {reason}")]
    InvalidDistribution { reason: String },

    #[error("natural parameter must lie in the interior of the simplex")]
    BoundaryParam,

    #[error("ensemble members disagree: {reason}")]
    EnsembleMismatch { reason: String },

    #[error("need at least {needed} ensemble members, got {got}")]
    NeedsEnsemble { needed: usize, got: usize },

    #[error("numerical failure: {reason}")]
    NumericalFailure { reason: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no overlapping items to evaluate")]
    EmptyEvaluation,

    #[error("degenerate input: {reason}")]
    DegenerateInput { reason: String },

    #[error("invalid crowd spec: {reason}")]
    InvalidSpec { reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
