//! EM-fitted annotator models. The per-item posterior over the true class
//! is the soft label.

pub mod dawid_skene;
pub mod mace;

pub use dawid_skene::{dawid_skene_fit, DawidSkeneConfig, DawidSkeneModel};
pub use mace::{mace_fit, MaceConfig, MaceModel};
