//! Evaluation and analysis: F1, accuracy against gold labels, calibrated
//! log-likelihood, Pearson correlation, and pairwise-JSD structure of an
//! ensemble.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::Ensemble;
use crate::annotation::GoldLabels;
use crate::dist::SoftLabelMatrix;
use crate::error::{Error, Result};
use crate::info_geom::js_divergence;

/// Classifier outputs to be calibrated: per-item logits (or log-probs;
/// any per-item additive shift cancels) with gold labels for every item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    item_ids: Vec<String>,
    log_probs: Vec<Vec<f64>>,
    gold_indices: Vec<usize>,
}

impl PredictionSet {
    pub fn new(item_ids: Vec<String>, log_probs: Vec<Vec<f64>>, gold: &GoldLabels) -> Result<Self> {
        if item_ids.len() != log_probs.len() {
            return Err(Error::LengthMismatch {
                left: item_ids.len(),
                right: log_probs.len(),
            });
        }
        let k = log_probs.first().map_or(0, Vec::len);
        if k < 2 {
            return Err(Error::InvalidVocabulary { count: k });
        }
        for row in &log_probs {
            if row.len() != k {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: k,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::DegenerateInput {
                    reason: "logits must be finite".to_string(),
                });
            }
        }
        let gold_indices = item_ids
            .iter()
            .map(|id| {
                gold.get(id).ok_or_else(|| Error::DegenerateInput {
                    reason: format!("item `{id}` has no gold label"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            item_ids,
            log_probs,
            gold_indices,
        })
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn k(&self) -> usize {
        self.log_probs[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Class 1 is the positive class.
    Binary,
    /// Unweighted mean of the per-class one-vs-rest scores.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall, and F1 with every 0/0 resolved to 0.
pub fn f1_scores(pred: &[usize], gold: &[usize], averaging: Averaging) -> Result<F1Report> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    match averaging {
        Averaging::Binary => Ok(binary_f1(pred, gold, 1)),
        Averaging::Macro => {
            let k = pred.iter().chain(gold).max().unwrap() + 1;
            let per_class: Vec<F1Report> =
                (0..k).map(|c| binary_f1(pred, gold, c)).collect();
            let mean = |f: fn(&F1Report) -> f64| {
                per_class.iter().map(f).sum::<f64>() / k as f64
            };
            Ok(F1Report {
                precision: mean(|r| r.precision),
                recall: mean(|r| r.recall),
                f1: mean(|r| r.f1),
            })
        }
    }
}

fn binary_f1(pred: &[usize], gold: &[usize], positive: usize) -> F1Report {
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fn_ = 0.0;
    for (&p, &g) in pred.iter().zip(gold) {
        match (p == positive, g == positive) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
            (false, false) => {}
        }
    }
    let ratio = |num: f64, den: f64| if den == 0.0 { 0.0 } else { num / den };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    F1Report {
        precision,
        recall,
        f1,
    }
}

/// Fraction of gold-covered items whose soft-label argmax equals gold.
pub fn accuracy_vs_gold(s: &SoftLabelMatrix, gold: &GoldLabels) -> Result<f64> {
    let mut evaluated = 0usize;
    let mut correct = 0usize;
    for (id, row) in s.item_ids.iter().zip(&s.rows) {
        if let Some(truth) = gold.get(id) {
            evaluated += 1;
            if row.argmax() == truth {
                correct += 1;
            }
        }
    }
    if evaluated == 0 {
        return Err(Error::EmptyEvaluation);
    }
    Ok(correct as f64 / evaluated as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CllConfig {
    pub splits: usize,
    pub seed: u64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Golden-section tolerance on ln T.
    pub search_tol: f64,
}

impl Default for CllConfig {
    fn default() -> Self {
        Self {
            splits: 5,
            seed: 0,
            t_lo: 0.01,
            t_hi: 100.0,
            search_tol: 1e-4,
        }
    }
}

/// One calibration split: the searched temperature, the halves it was
/// searched and scored on, and both scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CllSplit {
    pub t_star: f64,
    /// Validation NLL at `t_star`, the quantity the search minimized.
    pub validation_nll: f64,
    /// Test-half NLL at `t_star`; the CLL is the mean of these.
    pub test_nll: f64,
    pub validation_items: Vec<usize>,
    pub test_items: Vec<usize>,
}

/// Per-split detail behind [`calibrated_log_likelihood`].
///
/// Each of `config.splits` seeded half/half partitions (the validation half
/// takes the extra item when the count is odd) searches `ln T` by
/// golden-section for the temperature minimizing the validation negative
/// log-likelihood of `softmax(logits / T)`, then scores the test half at it.
pub fn cll_splits(p: &PredictionSet, config: &CllConfig) -> Result<Vec<CllSplit>> {
    if p.n_items() < 2 {
        return Err(Error::EmptyEvaluation);
    }
    if config.splits == 0 {
        return Err(Error::DegenerateInput {
            reason: "need at least one split".to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut indices: Vec<usize> = (0..p.n_items()).collect();
    let mut out = Vec::with_capacity(config.splits);
    for _ in 0..config.splits {
        indices.shuffle(&mut rng);
        let validation_len = indices.len().div_ceil(2);
        let (validation, test) = indices.split_at(validation_len);
        let (lo, hi) = (config.t_lo.ln(), config.t_hi.ln());
        let (tau_star, validation_nll) = golden_section_min(
            |tau| mean_nll(p, validation, tau.exp()),
            lo,
            hi,
            config.search_tol,
        );
        let t_star = tau_star.exp();
        out.push(CllSplit {
            t_star,
            validation_nll,
            test_nll: mean_nll(p, test, t_star),
            validation_items: validation.to_vec(),
            test_items: test.to_vec(),
        });
    }
    Ok(out)
}

/// Calibrated log-likelihood, in nats; lower is better. The mean test-half
/// NLL of [`cll_splits`].
pub fn calibrated_log_likelihood(p: &PredictionSet, config: &CllConfig) -> Result<f64> {
    let splits = cll_splits(p, config)?;
    Ok(splits.iter().map(|s| s.test_nll).sum::<f64>() / splits.len() as f64)
}

/// Mean negative log-likelihood of the gold labels under
/// `softmax(logits / t)` over the given item indices.
pub fn mean_nll(p: &PredictionSet, items: &[usize], t: f64) -> f64 {
    let total: f64 = items
        .iter()
        .map(|&i| {
            let scaled: Vec<f64> = p.log_probs[i].iter().map(|l| l / t).collect();
            let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + scaled.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
            lse - scaled[p.gold_indices[i]]
        })
        .sum();
    total / items.len() as f64
}

/// Golden-section search for the minimizer of a unimodal function on
/// `[lo, hi]`; returns the midpoint of the final bracket and its value.
pub fn golden_section_min(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INVPHI * (hi - lo);
    let mut b = lo + INVPHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INVPHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INVPHI * (hi - lo);
            fb = f(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid);
    (mid, fmid)
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput {
            reason: "correlation needs at least two points".to_string(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput {
            reason: "correlation of a constant vector is undefined".to_string(),
        });
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Mean pairwise JSDs between labeled matrices, for heatmap-style analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsdMatrix {
    pub method_names: Vec<String>,
    /// `values[a][b]`: mean over items of `JSD(row_a || row_b)`.
    /// Symmetric with a zero diagonal.
    pub values: Vec<Vec<f64>>,
}

/// Mean-over-items JSD between every pair drawn from the ensemble members
/// plus `extra` matrices.
pub fn pairwise_jsd_matrix(e: &Ensemble, extra: &[SoftLabelMatrix]) -> Result<JsdMatrix> {
    let mut matrices: Vec<SoftLabelMatrix> = e.members().to_vec();
    matrices.extend(extra.iter().cloned());
    // Revalidates item alignment across members and extras.
    let combined = Ensemble::new(matrices)?;
    let matrices = combined.members();

    let names: Vec<String> = matrices.iter().map(|m| m.method_name.clone()).collect();
    let n_items = combined.n_items() as f64;
    let mut values = vec![vec![0.0; matrices.len()]; matrices.len()];
    for a in 0..matrices.len() {
        for b in a + 1..matrices.len() {
            let mean = matrices[a]
                .rows
                .iter()
                .zip(&matrices[b].rows)
                .map(|(p, q)| js_divergence(p.probs(), q.probs()))
                .sum::<f64>()
                / n_items;
            values[a][b] = mean;
            values[b][a] = mean;
        }
    }
    Ok(JsdMatrix {
        method_names: names,
        values,
    })
}

/// How each ensemble member sits relative to an aggregate `q` and to the
/// other members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityReport {
    /// Mean over items of `JSD(q || p_m)`, per member.
    pub per_method_jsd_to_q: Vec<f64>,
    /// Mean over items and other members of `JSD(p_m || p_k)`, per member.
    pub per_method_mean_jsd_to_others: Vec<f64>,
    /// Pearson correlation between the two vectors across members.
    pub pearson_r: f64,
}

/// Compares member-to-aggregate distances with member-to-member distances.
///
/// Needs at least 3 members for the correlation to exist at all; with 3 it
/// is still fragile, so fewer than 4 logs a warning.
pub fn centroid_proximity(e: &Ensemble, q: &SoftLabelMatrix) -> Result<ProximityReport> {
    if e.m() < 3 {
        return Err(Error::NeedsEnsemble {
            needed: 3,
            got: e.m(),
        });
    }
    if e.m() < 4 {
        log::warn!(
            "correlation over {} members is fragile; prefer 4 or more",
            e.m()
        );
    }
    if q.item_ids != *e.item_ids() || q.k() != e.k() {
        return Err(Error::EnsembleMismatch {
            reason: "aggregate matrix does not align with the ensemble".to_string(),
        });
    }

    let n_items = e.n_items() as f64;
    let mean_jsd = |a: &SoftLabelMatrix, b: &SoftLabelMatrix| {
        a.rows
            .iter()
            .zip(&b.rows)
            .map(|(p, r)| js_divergence(p.probs(), r.probs()))
            .sum::<f64>()
            / n_items
    };

    let to_q: Vec<f64> = e.members().iter().map(|m| mean_jsd(q, m)).collect();
    let to_others: Vec<f64> = (0..e.m())
        .map(|m| {
            (0..e.m())
                .filter(|&k| k != m)
                .map(|k| mean_jsd(&e.members()[m], &e.members()[k]))
                .sum::<f64>()
                / (e.m() - 1) as f64
        })
        .collect();
    let pearson_r = pearson_correlation(&to_q, &to_others)?;
    Ok(ProximityReport {
        per_method_jsd_to_q: to_q,
        per_method_mean_jsd_to_others: to_others,
        pearson_r,
    })
}
