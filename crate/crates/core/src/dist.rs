//! Points on the probability simplex and per-item soft-label matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum of a distribution's entries.
pub const SIMPLEX_SUM_TOL: f64 = 1e-8;

/// A categorical distribution over the K labels of one item.
///
/// Entries are non-negative and sum to 1 within [`SIMPLEX_SUM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and wraps a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution {
                reason: format!("need at least 2 entries, got {}", probs.len()),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution {
                    reason: format!("entry {i} is {p}"),
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::InvalidDistribution {
                reason: format!("entries sum to {sum}"),
            });
        }
        Ok(Self { probs })
    }

    /// Normalizes a vector of non-negative weights to a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidDistribution {
                reason: format!("weights sum to {sum}"),
            });
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// The uniform distribution over `k` labels.
    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    /// A one-hot distribution with all mass on `index`.
    pub fn one_hot(k: usize, index: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    /// Index of the largest entry; ties break to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    /// Shannon entropy in nats, with the 0 log 0 := 0 convention.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

/// Index of the largest value; ties break to the lowest index.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-item soft labels produced by one labeling or aggregation method.
///
/// Row order matches the item order of the originating annotation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftLabelMatrix {
    pub method_name: String,
    pub item_ids: Vec<String>,
    pub rows: Vec<Distribution>,
}

impl SoftLabelMatrix {
    pub fn new(method_name: impl Into<String>, item_ids: Vec<String>, rows: Vec<Distribution>) -> Result<Self> {
        if item_ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: item_ids.len(),
                right: rows.len(),
            });
        }
        if let Some(first) = rows.first() {
            let k = first.k();
            if let Some(bad) = rows.iter().find(|r| r.k() != k) {
                return Err(Error::LengthMismatch {
                    left: k,
                    right: bad.k(),
                });
            }
        }
        Ok(Self {
            method_name: method_name.into(),
            item_ids,
            rows,
        })
    }

    pub fn n_items(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.rows.first().map_or(0, Distribution::k)
    }

    /// Hard labels: per-item argmax (ties to the lowest index).
    pub fn argmax_labels(&self) -> Vec<usize> {
        self.rows.iter().map(Distribution::argmax).collect()
    }

    /// Same rows under a new method name.
    pub fn renamed(mut self, method_name: impl Into<String>) -> Self {
        self.method_name = method_name.into();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_entries() {
        assert!(Distribution::new(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn rejects_bad_sum() {
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![0.5, 0.5 + 2e-8]).is_err());
    }

    #[test]
    fn accepts_sum_within_tolerance() {
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-9]).is_ok());
    }

    #[test]
    fn argmax_ties_break_low() {
        assert_eq!(argmax(&[2.0, 2.0]), 0);
        assert_eq!(argmax(&[0.0, 5.0, 2.0]), 1);
        assert_eq!(Distribution::uniform(3).argmax(), 0);
    }

    #[test]
    fn entropy_of_uniform_is_log_k() {
        let u = Distribution::uniform(4);
        assert!((u.entropy() - 4.0_f64.ln()).abs() < 1e-12);
        let h = Distribution::one_hot(3, 1);
        assert_eq!(h.entropy(), 0.0);
    }

    #[test]
    fn matrix_rejects_ragged_rows() {
        let rows = vec![Distribution::uniform(2), Distribution::uniform(3)];
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(SoftLabelMatrix::new("m", ids, rows).is_err());
    }
}
