//! Turning crowd annotations into soft labels.
//!
//! The pipeline has three stages. Individual labeling methods
//! ([`soft_label`], [`truth`]) map raw annotations to one distribution per
//! item. Aggregation ([`aggregate`]) fuses several such views into a single
//! distribution per item, either by averaging, by the Jensen-Shannon
//! centroid, or after per-view temperature scaling. Evaluation ([`metrics`])
//! scores any of these against gold labels and measures how far the views
//! disagree. [`synth`] generates crowds with known ground truth so every
//! stage can be tested against a controlled oracle.

pub mod aggregate;
pub mod annotation;
pub mod dist;
pub mod error;
pub mod info_geom;
pub mod io;
pub mod metrics;
pub mod soft_label;
pub mod synth;
pub mod truth;

pub use annotation::{
    majority_vote, vote_counts, AnnotationFormat, AnnotationRecord, AnnotationSet, GoldLabels,
    LabelVocabulary, VoteMatrix,
};
pub use dist::{Distribution, SoftLabelMatrix};
pub use error::{Error, Result};
