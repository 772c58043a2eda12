//! Synthetic crowd generator with planted ground truth, for oracle testing
//! of the truth-inference models and the end-to-end pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationSet, GoldLabels, LabelVocabulary};
use crate::dist::Distribution;
use crate::error::{Error, Result};

/// How one annotator behaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnotatorRole {
    /// Emits the true label with probability `competence`, otherwise a
    /// uniform draw over all labels: agreement with truth is
    /// `d + (1 - d)/K`, and each wrong label receives `(1 - d)/K`.
    Faithful { competence: f64 },
    /// Ignores the item and draws from a fixed strategy.
    Spammer { strategy: Distribution },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdSpec {
    pub n_items: usize,
    pub k: usize,
    pub n_annotators: usize,
    pub annotator_roles: Vec<AnnotatorRole>,
    pub class_prior: Distribution,
    /// Probability each annotator labels each item. Items that would end
    /// up unlabeled are redrawn, so every item gets at least one record.
    pub coverage: f64,
    pub seed: u64,
}

impl CrowdSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidSpec { reason });
        if self.n_items < 1 {
            return fail("n_items must be at least 1".to_string());
        }
        if self.n_annotators < 1 {
            return fail("n_annotators must be at least 1".to_string());
        }
        if self.k < 2 {
            return fail(format!("k must be at least 2, got {}", self.k));
        }
        if self.class_prior.k() != self.k {
            return fail(format!(
                "class_prior has {} entries for k = {}",
                self.class_prior.k(),
                self.k
            ));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return fail(format!("coverage must be in (0, 1], got {}", self.coverage));
        }
        if self.annotator_roles.len() != self.n_annotators {
            return fail(format!(
                "annotator_roles lists {} roles for n_annotators = {}",
                self.annotator_roles.len(),
                self.n_annotators
            ));
        }
        for (j, role) in self.annotator_roles.iter().enumerate() {
            match role {
                AnnotatorRole::Faithful { competence } => {
                    let floor = 1.0 / self.k as f64;
                    if !(*competence > floor && *competence <= 1.0) {
                        return fail(format!(
                            "annotator {j}: competence must be in (1/k, 1], got {competence}"
                        ));
                    }
                }
                AnnotatorRole::Spammer { strategy } => {
                    if strategy.k() != self.k {
                        return fail(format!(
                            "annotator {j}: strategy has {} entries for k = {}",
                            strategy.k(),
                            self.k
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `item_0`, `item_1`, .. zero-padded so lexicographic order matches
    /// generation order.
    pub fn item_id(&self, i: usize) -> String {
        let width = digits(self.n_items);
        format!("item_{i:0width$}")
    }

    pub fn annotator_id(&self, j: usize) -> String {
        let width = digits(self.n_annotators);
        format!("ann_{j:0width$}")
    }

    /// `L0`, `L1`, .. zero-padded: label index in the vocabulary equals the
    /// class index everywhere.
    pub fn label_name(&self, c: usize) -> String {
        let width = digits(self.k);
        format!("L{c:0width$}")
    }

    pub fn vocabulary(&self) -> Result<LabelVocabulary> {
        LabelVocabulary::new((0..self.k).map(|c| self.label_name(c)).collect())
    }
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).max(1).ilog10() as usize + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCrowd {
    pub annotations: AnnotationSet,
    pub truth: GoldLabels,
}

/// Samples a crowd: truth from the class prior, then per (item, annotator)
/// a coverage coin and a role-driven emission. Fully determined by the spec.
pub fn generate_crowd(spec: &CrowdSpec) -> Result<SyntheticCrowd> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let truth: Vec<usize> = (0..spec.n_items)
        .map(|_| sample_index(&mut rng, spec.class_prior.probs()))
        .collect();

    let mut triples = Vec::new();
    for (i, &t) in truth.iter().enumerate() {
        let labelers: Vec<usize> = loop {
            let picked: Vec<usize> = (0..spec.n_annotators)
                .filter(|_| rng.gen_bool(spec.coverage))
                .collect();
            if !picked.is_empty() {
                break picked;
            }
        };
        for j in labelers {
            let emitted = match &spec.annotator_roles[j] {
                AnnotatorRole::Faithful { competence } => {
                    if rng.gen_bool(*competence) {
                        t
                    } else {
                        rng.gen_range(0..spec.k)
                    }
                }
                AnnotatorRole::Spammer { strategy } => sample_index(&mut rng, strategy.probs()),
            };
            triples.push((spec.item_id(i), spec.annotator_id(j), spec.label_name(emitted)));
        }
    }

    let annotations = AnnotationSet::from_triples(triples, Some(spec.vocabulary()?))?;
    let truth = truth
        .iter()
        .enumerate()
        .map(|(i, &t)| (spec.item_id(i), t))
        .collect();
    Ok(SyntheticCrowd { annotations, truth })
}

fn sample_index(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
