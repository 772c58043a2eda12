//! MACE: each annotation is either a faithful copy of the latent true label
//! or a draw from the annotator's private spamming strategy. EM with random
//! restarts; trust is the probability of answering faithfully.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationSet;
use crate::dist::{Distribution, SoftLabelMatrix};
use crate::error::Result;
use crate::soft_label::softmax;

/// Pseudo-count added to every spam-strategy cell in the M-step.
const SPAM_SMOOTHING: f64 = 0.1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MaceConfig {
    pub max_iters: usize,
    /// Stop a run when the largest absolute posterior change falls below this.
    pub tol: f64,
    /// Independent EM runs; the one with the best final objective wins.
    pub restarts: usize,
    /// Beta-style pseudo-counts on the faithful/spamming outcomes of trust.
    pub smoothing_alpha: f64,
    pub smoothing_beta: f64,
    pub seed: u64,
}

impl Default for MaceConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            tol: 1e-6,
            restarts: 10,
            smoothing_alpha: 0.5,
            smoothing_beta: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaceModel {
    /// Per-annotator probability of answering faithfully, in [0, 1].
    pub trust: Vec<f64>,
    /// Per-annotator emission distribution when spamming.
    pub spam_strategy: Vec<Distribution>,
    pub posteriors: SoftLabelMatrix,
    /// Smoothed EM objective per iteration of the winning run, in nats.
    /// Non-decreasing.
    pub objective_trace: Vec<f64>,
}

/// Fits the model by EM over `config.restarts` runs.
///
/// The true label is uniform a priori. Trust starts at a seeded uniform
/// draw from [0.4, 0.9) per run (spam strategies start uniform), which
/// breaks the symmetry between runs; the pseudo-counts keep trust off
/// {0, 1} and strategies interior, and make the recorded objective the
/// penalized log-likelihood EM cannot decrease.
pub fn mace_fit(a: &AnnotationSet, config: &MaceConfig) -> Result<MaceModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = a.n_annotators();
    let mut best: Option<Run> = None;
    for _ in 0..config.restarts.max(1) {
        let trust_init: Vec<f64> = (0..m).map(|_| rng.gen_range(0.4..0.9)).collect();
        let run = run_em(a, config, trust_init);
        if best.as_ref().is_none_or(|b| run.objective() > b.objective()) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart ran");

    Ok(MaceModel {
        trust: run.trust,
        spam_strategy: run
            .strategy
            .into_iter()
            .map(Distribution::new)
            .collect::<Result<Vec<_>>>()?,
        posteriors: SoftLabelMatrix::new(
            "mace",
            a.items().to_vec(),
            run.posteriors
                .into_iter()
                .map(Distribution::new)
                .collect::<Result<Vec<_>>>()?,
        )?,
        objective_trace: run.trace,
    })
}

struct Run {
    trust: Vec<f64>,
    strategy: Vec<Vec<f64>>,
    posteriors: Vec<Vec<f64>>,
    trace: Vec<f64>,
}

impl Run {
    fn objective(&self) -> f64 {
        *self.trace.last().expect("every run records iterations")
    }
}

fn run_em(a: &AnnotationSet, config: &MaceConfig, trust_init: Vec<f64>) -> Run {
    let k = a.k();
    let kf = k as f64;
    let by_item = a.by_item();
    let by_annotator = a.by_annotator();
    let (alpha, beta) = (config.smoothing_alpha, config.smoothing_beta);

    let mut trust = trust_init;
    let mut strategy = vec![vec![1.0 / kf; k]; a.n_annotators()];
    let mut posteriors = vec![vec![1.0 / kf; k]; a.n_items()];
    let mut trace = Vec::new();

    // emission(j, c, y) = trust_j·[y = c] + (1 − trust_j)·strategy_j[y],
    // strictly positive throughout because trust stays in (0, 1) and
    // strategies stay interior.
    let emission = |trust: &[f64], strategy: &[Vec<f64>], j: usize, c: usize, y: usize| {
        let spam = (1.0 - trust[j]) * strategy[j][y];
        if y == c {
            trust[j] + spam
        } else {
            spam
        }
    };

    for _ in 0..config.max_iters {
        // E-step: posterior over the true label, plus the objective at the
        // current parameters.
        let mut objective = trust
            .iter()
            .map(|&t| alpha * t.ln() + beta * (1.0 - t).ln())
            .sum::<f64>()
            + SPAM_SMOOTHING
                * strategy
                    .iter()
                    .flatten()
                    .map(|p| p.ln())
                    .sum::<f64>();
        let mut max_delta: f64 = 0.0;
        for (i, records) in by_item.iter().enumerate() {
            let mut logits = vec![-kf.ln(); k];
            for &(j, y) in records {
                for (c, l) in logits.iter_mut().enumerate() {
                    *l += emission(&trust, &strategy, j, c, y).ln();
                }
            }
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            objective += max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            for (old, new) in posteriors[i].iter_mut().zip(softmax(&logits)) {
                max_delta = max_delta.max((new - *old).abs());
                *old = new;
            }
        }
        trace.push(objective);

        if trace.len() > 1 && max_delta < config.tol {
            break;
        }

        // M-step. The faithful-posterior weight of a record with label y is
        // q(y)·trust / emission(y, y); everything else counts as spam.
        let mut new_trust = Vec::with_capacity(trust.len());
        let mut new_strategy = Vec::with_capacity(strategy.len());
        for (j, records) in by_annotator.iter().enumerate() {
            let mut faithful = 0.0;
            let mut spam = vec![SPAM_SMOOTHING; k];
            for &(i, y) in records {
                let f = posteriors[i][y] * trust[j] / emission(&trust, &strategy, j, y, y);
                faithful += f;
                spam[y] += 1.0 - f;
            }
            new_trust.push((faithful + alpha) / (records.len() as f64 + alpha + beta));
            let total: f64 = spam.iter().sum();
            new_strategy.push(spam.into_iter().map(|w| w / total).collect());
        }
        trust = new_trust;
        strategy = new_strategy;
    }

    Run {
        trust,
        strategy,
        posteriors,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::LabelVocabulary;

    fn set(triples: &[(String, String, String)], vocab: &[&str]) -> AnnotationSet {
        let vocab = LabelVocabulary::new(vocab.iter().map(|s| s.to_string()).collect()).unwrap();
        AnnotationSet::from_triples(triples.to_vec(), Some(vocab)).unwrap()
    }

    fn triple(i: &str, a: &str, l: &str) -> (String, String, String) {
        (i.to_string(), a.to_string(), l.to_string())
    }

    #[test]
    fn unanimity_pins_the_posterior() {
        let triples: Vec<_> = (0..5)
            .flat_map(|i| {
                ["a1", "a2"]
                    .iter()
                    .map(move |a| triple(&format!("i{i}"), a, "B"))
            })
            .collect();
        let model = mace_fit(&set(&triples, &["A", "B"]), &MaceConfig::default()).unwrap();
        for row in &model.posteriors.rows {
            assert_eq!(row.argmax(), 1);
        }
    }

    #[test]
    fn spammer_earns_less_trust_than_faithful_annotators() {
        // Two annotators agree on a mixed labeling of 50 items; the third
        // answers A regardless.
        let mut triples = Vec::new();
        for i in 0..50 {
            let label = if i % 2 == 0 { "A" } else { "B" };
            triples.push(triple(&format!("i{i}"), "good1", label));
            triples.push(triple(&format!("i{i}"), "good2", label));
            triples.push(triple(&format!("i{i}"), "spam", "A"));
        }
        let a = set(&triples, &["A", "B"]);
        let model = mace_fit(&a, &MaceConfig::default()).unwrap();
        let pos = |name: &str| a.annotator_position(name).unwrap();
        let spam_trust = model.trust[pos("spam")];
        assert!(
            spam_trust < model.trust[pos("good1")] && spam_trust < model.trust[pos("good2")],
            "trust: {:?}",
            model.trust
        );
    }

    #[test]
    fn symmetric_evidence_averages_to_a_coin_flip() {
        // One item labeled A by one annotator and B by another: single runs
        // land wherever their trust init pushes them, but the seed-averaged
        // posterior must sit near 0.5.
        let triples = vec![triple("i1", "a1", "A"), triple("i1", "a2", "B")];
        let a = set(&triples, &["A", "B"]);
        let mean: f64 = (0..20)
            .map(|seed| {
                let config = MaceConfig {
                    seed,
                    ..MaceConfig::default()
                };
                mace_fit(&a, &config).unwrap().posteriors.rows[0].probs()[0]
            })
            .sum::<f64>()
            / 20.0;
        assert!((mean - 0.5).abs() <= 0.05, "mean posterior {mean}");
    }

    #[test]
    fn objective_is_non_decreasing() {
        let mut triples = Vec::new();
        for i in 0..12 {
            triples.push(triple(&format!("i{i}"), "a1", if i % 3 == 0 { "B" } else { "A" }));
            triples.push(triple(&format!("i{i}"), "a2", if i % 4 == 0 { "A" } else { "B" }));
            triples.push(triple(&format!("i{i}"), "a3", "A"));
        }
        let model = mace_fit(&set(&triples, &["A", "B"]), &MaceConfig::default()).unwrap();
        assert!(model.objective_trace.len() >= 2);
        for pair in model.objective_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9, "trace decreased: {pair:?}");
        }
    }

    #[test]
    fn parameters_stay_in_bounds() {
        let triples = vec![
            triple("i1", "a1", "A"),
            triple("i1", "a2", "B"),
            triple("i2", "a1", "A"),
            triple("i2", "a2", "A"),
        ];
        let model = mace_fit(&set(&triples, &["A", "B"]), &MaceConfig::default()).unwrap();
        assert!(model.trust.iter().all(|&t| (0.0..=1.0).contains(&t)));
        for s in &model.spam_strategy {
            assert!(s.probs().iter().all(|&p| p > 0.0));
        }
        for row in &model.posteriors.rows {
            assert!((row.probs().iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn same_seed_same_model() {
        let triples = vec![
            triple("i1", "a1", "A"),
            triple("i1", "a2", "B"),
            triple("i2", "a1", "B"),
            triple("i2", "a2", "B"),
        ];
        let a = set(&triples, &["A", "B"]);
        let one = mace_fit(&a, &MaceConfig::default()).unwrap();
        let two = mace_fit(&a, &MaceConfig::default()).unwrap();
        assert_eq!(one, two);
    }
}
