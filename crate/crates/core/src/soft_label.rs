//! Normalization methods that turn per-item vote counts into soft labels.

use crate::annotation::VoteMatrix;
use crate::dist::{Distribution, SoftLabelMatrix};
use crate::error::{Error, Result};

/// Divides each item's vote counts by their sum:
/// `p_i[y] = c_i[y] / sum_y' c_i[y']`.
pub fn standard_normalize(votes: &VoteMatrix) -> Result<SoftLabelMatrix> {
    let rows = votes
        .counts()
        .iter()
        .zip(votes.item_ids())
        .map(|(row, id)| {
            let total: u32 = row.iter().sum();
            if total == 0 {
                return Err(Error::EmptyItem {
                    item_id: id.clone(),
                });
            }
            Distribution::new(row.iter().map(|&c| f64::from(c) / f64::from(total)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    SoftLabelMatrix::new("standard", votes.item_ids().to_vec(), rows)
}

/// Softmax over raw counts: `p_i[y] = exp(c_i[y]) / sum_y' exp(c_i[y'])`.
///
/// Computed with max-subtraction, so arbitrarily large counts stay finite.
pub fn softmax_normalize(votes: &VoteMatrix) -> Result<SoftLabelMatrix> {
    let rows = votes
        .counts()
        .iter()
        .map(|row| {
            let logits: Vec<f64> = row.iter().map(|&c| f64::from(c)).collect();
            Distribution::new(softmax(&logits))
        })
        .collect::<Result<Vec<_>>>()?;
    SoftLabelMatrix::new("softmax", votes.item_ids().to_vec(), rows)
}

/// Numerically stable softmax of arbitrary finite logits.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}
