//! Divergences and the exponential-family coordinates used by the
//! Jensen-Shannon centroid solver.
//!
//! All divergences are in nats.

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};

/// Smoothing constant used when probabilities must be strictly positive.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Kullback-Leibler divergence `KL(p || q) = sum_j p_j ln(p_j / q_j)`.
///
/// Terms with `p_j = 0` contribute nothing. If some `q_j = 0` while
/// `p_j > 0` the divergence is `+inf`; callers that cannot tolerate that
/// should [`smooth`] first.
///
/// Panics if the slices have different lengths.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must have equal support");
    let mut total = 0.0;
    for (&pj, &qj) in p.iter().zip(q) {
        if pj == 0.0 {
            continue;
        }
        if qj == 0.0 {
            return f64::INFINITY;
        }
        total += pj * (pj / qj).ln();
    }
    total
}

/// Jensen-Shannon divergence
/// `JSD(p || q) = KL(p || s)/2 + KL(q || s)/2` with `s = (p + q)/2`.
///
/// Symmetric, finite for any pair of distributions, and at most `ln 2`.
///
/// Panics if the slices have different lengths.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must have equal support");
    let mut total = 0.0;
    for (&pj, &qj) in p.iter().zip(q) {
        let sj = 0.5 * (pj + qj);
        // Both terms join the accumulator as one sum, which keeps the
        // result bit-identical under argument swap.
        let lhs = if pj > 0.0 { pj * (pj / sj).ln() } else { 0.0 };
        let rhs = if qj > 0.0 { qj * (qj / sj).ln() } else { 0.0 };
        total += lhs + rhs;
    }
    0.5 * total
}

/// Additive smoothing onto the open simplex:
/// `smooth(p)_j = (p_j + eps) / (1 + K * eps)`.
pub fn smooth(p: &[f64], eps: f64) -> Vec<f64> {
    let denom = 1.0 + p.len() as f64 * eps;
    p.iter().map(|&pj| (pj + eps) / denom).collect()
}

/// Natural parameters of a categorical distribution: its first `K - 1`
/// probabilities. Only interior points are representable, so every
/// coordinate is strictly positive and the coordinates sum to less than 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct NaturalParam {
    theta: Vec<f64>,
}

impl NaturalParam {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "natural parameter needs at least one coordinate".to_string(),
            });
        }
        let sum: f64 = theta.iter().sum();
        if theta.iter().any(|&t| !t.is_finite() || t <= 0.0) || sum >= 1.0 {
            return Err(Error::BoundaryParam);
        }
        Ok(Self { theta })
    }

    /// Drops the last coordinate of an interior distribution.
    pub fn from_distribution(dist: &Distribution) -> Result<Self> {
        let probs = dist.probs();
        if probs.iter().any(|&p| p <= 0.0) {
            return Err(Error::BoundaryParam);
        }
        Self::new(probs[..probs.len() - 1].to_vec())
    }

    /// Restores the full distribution, last coordinate `1 - sum(theta)`.
    pub fn to_distribution(&self) -> Result<Distribution> {
        let mut probs = self.theta.clone();
        probs.push(1.0 - self.theta.iter().sum::<f64>());
        Distribution::new(probs)
    }

    pub fn coords(&self) -> &[f64] {
        &self.theta
    }

    /// Number of categories, one more than the coordinate count.
    pub fn k(&self) -> usize {
        self.theta.len() + 1
    }

    pub fn last_prob(&self) -> f64 {
        1.0 - self.theta.iter().sum::<f64>()
    }
}

impl TryFrom<Vec<f64>> for NaturalParam {
    type Error = Error;

    fn try_from(theta: Vec<f64>) -> Result<Self> {
        Self::new(theta)
    }
}

impl From<NaturalParam> for Vec<f64> {
    fn from(p: NaturalParam) -> Self {
        p.theta
    }
}

/// Dual (expectation) parameters: the image of [`NaturalParam`] under the
/// negentropy gradient, `eta_k = ln(theta_k / theta_K)`. Any finite vector
/// is a valid dual point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DualParam {
    eta: Vec<f64>,
}

impl DualParam {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "dual parameter needs at least one coordinate".to_string(),
            });
        }
        if eta.iter().any(|e| !e.is_finite()) {
            return Err(Error::NumericalFailure {
                reason: "dual parameter has non-finite coordinates".to_string(),
            });
        }
        Ok(Self { eta })
    }

    pub fn coords(&self) -> &[f64] {
        &self.eta
    }

    pub fn k(&self) -> usize {
        self.eta.len() + 1
    }
}

impl TryFrom<Vec<f64>> for DualParam {
    type Error = Error;

    fn try_from(eta: Vec<f64>) -> Result<Self> {
        Self::new(eta)
    }
}

impl From<DualParam> for Vec<f64> {
    fn from(p: DualParam) -> Self {
        p.eta
    }
}

/// Negative Shannon entropy in natural coordinates:
/// `F(theta) = sum_k theta_k ln theta_k + theta_K ln theta_K`
/// with `theta_K = 1 - sum(theta)`.
pub fn negentropy(theta: &NaturalParam) -> f64 {
    let last = theta.last_prob();
    theta.coords().iter().map(|&t| t * t.ln()).sum::<f64>() + last * last.ln()
}

/// Gradient of [`negentropy`]: `eta_k = ln(theta_k / theta_K)`.
pub fn grad_negentropy(theta: &NaturalParam) -> DualParam {
    let last = theta.last_prob();
    DualParam {
        eta: theta.coords().iter().map(|&t| (t / last).ln()).collect(),
    }
}

/// Inverse gradient: `theta_k = exp(eta_k) / (1 + sum_j exp(eta_j))`.
///
/// Evaluated as a softmax over `(eta_1, .., eta_{K-1}, 0)` with
/// max-subtraction, so large coordinates cannot overflow. Coordinates so
/// extreme that a probability underflows to zero are a numerical failure.
pub fn grad_negentropy_inverse(eta: &DualParam) -> Result<NaturalParam> {
    let max = eta.coords().iter().copied().fold(0.0, f64::max);
    let exps: Vec<f64> = eta.coords().iter().map(|&e| (e - max).exp()).collect();
    let denom = (-max).exp() + exps.iter().sum::<f64>();
    let theta: Vec<f64> = exps.into_iter().map(|e| e / denom).collect();
    NaturalParam::new(theta).map_err(|_| Error::NumericalFailure {
        reason: "inverse gradient left the open simplex".to_string(),
    })
}

/// Midpoint of two natural parameters, coordinate-wise.
pub fn midpoint(a: &NaturalParam, b: &NaturalParam) -> NaturalParam {
    NaturalParam {
        theta: a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(&x, &y)| 0.5 * (x + y))
            .collect(),
    }
}
