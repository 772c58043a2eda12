//! Dawid-Skene: per-annotator confusion matrices over a shared class prior,
//! fitted by EM with smoothed maximum-a-posteriori updates.

use serde::{Deserialize, Serialize};

use crate::annotation::{vote_counts, AnnotationSet};
use crate::dist::{Distribution, SoftLabelMatrix};
use crate::error::Result;
use crate::soft_label::{softmax, standard_normalize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DawidSkeneConfig {
    pub max_iters: usize,
    /// Stop when the largest absolute posterior change falls below this.
    pub tol: f64,
    /// Pseudo-count added to every prior and confusion cell in the M-step.
    pub smoothing: f64,
}

impl Default for DawidSkeneConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-6,
            smoothing: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DawidSkeneModel {
    pub class_prior: Distribution,
    /// `confusion[j][k][y]`: probability annotator `j` emits label `y` when
    /// the true class is `k`. Every row `confusion[j][k]` sums to 1.
    pub confusion: Vec<Vec<Vec<f64>>>,
    pub posteriors: SoftLabelMatrix,
    /// Smoothed EM objective per iteration (data log-likelihood plus the
    /// pseudo-count penalty), in nats. Non-decreasing.
    pub log_likelihood_trace: Vec<f64>,
}

/// Fits the model by EM.
///
/// Posteriors start from the vote proportions. Each iteration re-estimates
/// the prior and confusion matrices from the posteriors (adding
/// `config.smoothing` to every cell) and then recomputes the posteriors;
/// the pseudo-counts act as Dirichlet priors, so the recorded objective is
/// the penalized log-likelihood, which EM cannot decrease.
pub fn dawid_skene_fit(a: &AnnotationSet, config: &DawidSkeneConfig) -> Result<DawidSkeneModel> {
    let k = a.k();
    let n = a.n_items();
    let m = a.n_annotators();
    let s = config.smoothing;
    let by_item = a.by_item();
    let by_annotator = a.by_annotator();

    let mut posteriors: Vec<Vec<f64>> = standard_normalize(&vote_counts(a))?
        .rows
        .into_iter()
        .map(Distribution::into_probs)
        .collect();

    let mut prior = vec![0.0; k];
    let mut confusion = vec![vec![vec![0.0; k]; k]; m];
    let mut trace = Vec::new();

    for _ in 0..config.max_iters {
        // M-step: smoothed counts from the current posteriors.
        for c in 0..k {
            let mass: f64 = posteriors.iter().map(|q| q[c]).sum();
            prior[c] = (mass + s) / (n as f64 + k as f64 * s);
        }
        for (j, records) in by_annotator.iter().enumerate() {
            for c in 0..k {
                let row = &mut confusion[j][c];
                row.iter_mut().for_each(|v| *v = s);
                let mut total = k as f64 * s;
                for &(i, y) in records {
                    row[y] += posteriors[i][c];
                    total += posteriors[i][c];
                }
                row.iter_mut().for_each(|v| *v /= total);
            }
        }

        // E-step in log space, recording the penalized objective.
        let mut objective = s
            * (prior.iter().map(|p| p.ln()).sum::<f64>()
                + confusion
                    .iter()
                    .flatten()
                    .flatten()
                    .map(|p| p.ln())
                    .sum::<f64>());
        let mut max_delta: f64 = 0.0;
        for (i, records) in by_item.iter().enumerate() {
            let mut logits: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
            for &(j, y) in records {
                for (c, l) in logits.iter_mut().enumerate() {
                    *l += confusion[j][c][y].ln();
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

        if max_delta < config.tol {
            break;
        }
    }

    Ok(DawidSkeneModel {
        class_prior: Distribution::new(prior)?,
        confusion,
        posteriors: SoftLabelMatrix::new(
            "ds",
            a.items().to_vec(),
            posteriors
                .into_iter()
                .map(Distribution::new)
                .collect::<Result<Vec<_>>>()?,
        )?,
        log_likelihood_trace: trace,
    })
}
