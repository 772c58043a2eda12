//! Multi-view aggregation: combining an ensemble of soft-label matrices
//! into one distribution per item, by averaging, Jensen-Shannon centroid,
//! temperature scaling, or both.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, SoftLabelMatrix};
use crate::error::{Error, Result};
use crate::info_geom::{
    grad_negentropy, grad_negentropy_inverse, js_divergence, midpoint, smooth, DualParam,
    NaturalParam, DEFAULT_EPSILON,
};
use crate::soft_label::softmax;

/// M soft-label matrices over the same items and vocabulary, one per
/// labeling method. Aggregation with a single member returns that member.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<SoftLabelMatrix>,
}

impl Ensemble {
    pub fn new(members: Vec<SoftLabelMatrix>) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::EnsembleMismatch {
            reason: "ensemble has no members".to_string(),
        })?;
        if first.n_items() == 0 {
            return Err(Error::DegenerateInput {
                reason: "ensemble members have no items".to_string(),
            });
        }
        for member in &members[1..] {
            if member.k() != first.k() {
                return Err(Error::EnsembleMismatch {
                    reason: format!(
                        "member `{}` has {} classes but `{}` has {}",
                        member.method_name,
                        member.k(),
                        first.method_name,
                        first.k()
                    ),
                });
            }
            if member.item_ids != first.item_ids {
                let reason = first
                    .item_ids
                    .iter()
                    .zip(&member.item_ids)
                    .position(|(a, b)| a != b)
                    .map(|i| {
                        format!(
                            "item {} is `{}` in `{}` but `{}` in `{}`",
                            i,
                            first.item_ids[i],
                            first.method_name,
                            member.item_ids[i],
                            member.method_name
                        )
                    })
                    .unwrap_or_else(|| {
                        format!(
                            "member `{}` has {} items but `{}` has {}",
                            member.method_name,
                            member.n_items(),
                            first.method_name,
                            first.n_items()
                        )
                    });
                return Err(Error::EnsembleMismatch { reason });
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[SoftLabelMatrix] {
        &self.members
    }

    pub fn m(&self) -> usize {
        self.members.len()
    }

    pub fn n_items(&self) -> usize {
        self.members[0].n_items()
    }

    pub fn k(&self) -> usize {
        self.members[0].k()
    }

    pub fn item_ids(&self) -> &[String] {
        &self.members[0].item_ids
    }
}

/// Per-item arithmetic mean of the member distributions.
pub fn aggregate_average(e: &Ensemble) -> Result<SoftLabelMatrix> {
    if e.m() == 1 {
        return Ok(e.members()[0].clone().renamed("average"));
    }
    let rows = average_rows(e)?
        .into_iter()
        .map(Distribution::new)
        .collect::<Result<Vec<_>>>()?;
    SoftLabelMatrix::new("average", e.item_ids().to_vec(), rows)
}

fn average_rows(e: &Ensemble) -> Result<Vec<Vec<f64>>> {
    let scale = 1.0 / e.m() as f64;
    let mut rows = vec![vec![0.0; e.k()]; e.n_items()];
    for member in e.members() {
        for (acc, row) in rows.iter_mut().zip(&member.rows) {
            for (a, p) in acc.iter_mut().zip(row.probs()) {
                *a += p * scale;
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CentroidConfig {
    pub max_iters: usize,
    /// Stop when no natural-parameter coordinate moves more than this.
    pub tol: f64,
    /// Smoothing applied to members before the natural-parameter transform.
    pub epsilon: f64,
}

impl Default for CentroidConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            tol: 1e-10,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Per-item Jensen-Shannon centroid: a local minimizer of
/// `sum_m JSD(p_m || q)`.
///
/// Solved per item by the fixed-point iteration
/// `theta_{t+1} = (grad F)^{-1}( mean_m grad F((theta_m + theta_t)/2) )`
/// in natural parameters, starting from the member average. Each step
/// cannot increase the objective.
pub fn js_centroid(e: &Ensemble, config: &CentroidConfig) -> Result<SoftLabelMatrix> {
    js_centroid_with_traces(e, config).map(|(labels, _)| labels)
}

/// [`js_centroid`] plus the per-item objective trace, one value per iterate
/// starting at the average initializer. Exposed for convergence analysis.
pub fn js_centroid_with_traces(
    e: &Ensemble,
    config: &CentroidConfig,
) -> Result<(SoftLabelMatrix, Vec<Vec<f64>>)> {
    if e.m() == 1 {
        let labels = e.members()[0].clone().renamed("centroid");
        let traces = vec![vec![0.0]; e.n_items()];
        return Ok((labels, traces));
    }

    let mut rows = Vec::with_capacity(e.n_items());
    let mut traces = Vec::with_capacity(e.n_items());
    for i in 0..e.n_items() {
        let members: Vec<Vec<f64>> = e
            .members()
            .iter()
            .map(|m| smooth(m.rows[i].probs(), config.epsilon))
            .collect();
        let (q, trace) = centroid_of(&members, config)?;
        rows.push(q);
        traces.push(trace);
    }
    let labels = SoftLabelMatrix::new("centroid", e.item_ids().to_vec(), rows)?;
    Ok((labels, traces))
}

fn centroid_of(members: &[Vec<f64>], config: &CentroidConfig) -> Result<(Distribution, Vec<f64>)> {
    let m = members.len() as f64;
    let k1 = members[0].len() - 1;
    let thetas: Vec<NaturalParam> = members
        .iter()
        .map(|p| NaturalParam::new(p[..k1].to_vec()))
        .collect::<Result<Vec<_>>>()?;

    let average: Vec<f64> = (0..k1)
        .map(|c| members.iter().map(|p| p[c]).sum::<f64>() / m)
        .collect();
    let mut theta = NaturalParam::new(average)?;

    let objective = |theta: &NaturalParam| -> Result<f64> {
        let q = theta.to_distribution()?;
        Ok(members.iter().map(|p| js_divergence(p, q.probs())).sum())
    };

    let mut trace = vec![objective(&theta)?];
    for _ in 0..config.max_iters {
        let mut mean_dual = vec![0.0; k1];
        for member_theta in &thetas {
            let dual = grad_negentropy(&midpoint(member_theta, &theta));
            for (acc, d) in mean_dual.iter_mut().zip(dual.coords()) {
                *acc += d / m;
            }
        }
        let next = grad_negentropy_inverse(&DualParam::new(mean_dual)?)?;
        let delta = next
            .coords()
            .iter()
            .zip(theta.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = next;
        trace.push(objective(&theta)?);
        if delta < config.tol {
            break;
        }
    }
    Ok((theta.to_distribution()?, trace))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TemperatureConfig {
    /// Regularization constant on the squared temperatures.
    pub lambda: f64,
    pub lr: f64,
    pub max_steps: usize,
    /// Stop when an accepted step improves the loss by less than this.
    pub tol: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for TemperatureConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            lr: 0.1,
            max_steps: 1000,
            tol: 1e-8,
            t_min: 0.05,
            t_max: 100.0,
        }
    }
}

/// Fitted per-member temperatures with the descent history of the loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSet {
    pub temps: Vec<f64>,
    pub lambda: f64,
    pub loss_trace: Vec<f64>,
}

impl TemperatureSet {
    /// A fixed assignment with an empty history, e.g. for forcing `T = 1`.
    pub fn fixed(temps: Vec<f64>, lambda: f64) -> Self {
        Self {
            temps,
            lambda,
            loss_trace: Vec::new(),
        }
    }

    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Log-probabilities of the smoothed member rows, `logs[m][i][c]`.
fn member_logs(e: &Ensemble, eps: f64) -> Vec<Vec<Vec<f64>>> {
    e.members()
        .iter()
        .map(|member| {
            member
                .rows
                .iter()
                .map(|row| smooth(row.probs(), eps).iter().map(|p| p.ln()).collect())
                .collect()
        })
        .collect()
}

fn check_temps(e: &Ensemble, temps: &[f64]) -> Result<()> {
    if temps.len() != e.m() {
        return Err(Error::EnsembleMismatch {
            reason: format!("{} temperatures for {} members", temps.len(), e.m()),
        });
    }
    if temps.iter().any(|&t| !t.is_finite() || t <= 0.0) {
        return Err(Error::DegenerateInput {
            reason: "temperatures must be finite and positive".to_string(),
        });
    }
    Ok(())
}

/// The temperature-scaling loss at the given temperatures:
/// pairwise JSDs of the scaled members averaged over items, plus the
/// regularizer `lambda * T^2` accrued inside the pair sum for both
/// endpoints of each pair, so every temperature carries an effective
/// penalty weight of (M-1)/Z.
pub fn temperature_loss(e: &Ensemble, temps: &[f64], lambda: f64) -> Result<f64> {
    check_temps(e, temps)?;
    let logs = member_logs(e, DEFAULT_EPSILON);
    Ok(loss_from_logs(&logs, temps, lambda))
}

/// Scaled-softmax rows of every member for one item.
fn scaled_item(logs: &[Vec<Vec<f64>>], temps: &[f64], i: usize) -> Vec<Vec<f64>> {
    logs.iter()
        .zip(temps)
        .map(|(member, t)| softmax(&member[i].iter().map(|l| l / t).collect::<Vec<_>>()))
        .collect()
}

fn loss_from_logs(logs: &[Vec<Vec<f64>>], temps: &[f64], lambda: f64) -> f64 {
    let m = temps.len();
    let n = logs[0].len();
    let z = (m * (m - 1) / 2) as f64;
    let mut jsd_sum = 0.0;
    for i in 0..n {
        let scaled = scaled_item(logs, temps, i);
        for j in 0..m {
            for k in j + 1..m {
                jsd_sum += js_divergence(&scaled[j], &scaled[k]);
            }
        }
    }
    let penalty: f64 = temps.iter().map(|t| (m - 1) as f64 * lambda * t * t).sum();
    jsd_sum / (n as f64 * z) + penalty / z
}

/// Gradient of [`temperature_loss`] with respect to `tau_m = ln T_m`,
/// evaluated at the given temperatures. Exposed for verification.
pub fn temperature_grad(e: &Ensemble, temps: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_temps(e, temps)?;
    let logs = member_logs(e, DEFAULT_EPSILON);
    Ok(grad_from_logs(&logs, temps, lambda))
}

fn grad_from_logs(logs: &[Vec<Vec<f64>>], temps: &[f64], lambda: f64) -> Vec<f64> {
    let m = temps.len();
    let n = logs[0].len();
    let z = (m * (m - 1) / 2) as f64;
    let mut grad = vec![0.0; m];

    // d p~_b / d tau = -(p~_b / T)(l_b - lbar): scaling the logits down
    // shifts mass toward uniform. Against the JSD slope
    // d JSD / d p~_b = ln(p~_b / s_b) / 2 this gives, per pair side,
    // d JSD / d tau = -(1/T) sum_b p~_b (l_b - lbar) g_b.
    for i in 0..n {
        let scaled = scaled_item(logs, temps, i);
        for j in 0..m {
            for k in j + 1..m {
                let (pj, pk) = (&scaled[j], &scaled[k]);
                for (side, probs, other) in [(j, pj, pk), (k, pk, pj)] {
                    let raw = &logs[side][i];
                    let lbar: f64 = probs.iter().zip(raw).map(|(p, l)| p * l).sum();
                    let mut slope = 0.0;
                    for (b, &pb) in probs.iter().enumerate() {
                        if pb == 0.0 {
                            continue;
                        }
                        let sb = 0.5 * (pb + other[b]);
                        let g = 0.5 * (pb / sb).ln();
                        slope += pb * (raw[b] - lbar) * g;
                    }
                    grad[side] -= slope / temps[side];
                }
            }
        }
    }
    for g in grad.iter_mut() {
        *g /= n as f64 * z;
    }
    for (j, g) in grad.iter_mut().enumerate() {
        *g += (m - 1) as f64 * 2.0 * lambda * temps[j] * temps[j] / z;
    }
    grad
}

/// Fits member temperatures by projected gradient descent on `ln T`,
/// starting at `T = 1`, with step halving whenever a step would increase
/// the loss. The recorded `loss_trace` is therefore non-increasing.
pub fn fit_temperatures(e: &Ensemble, config: &TemperatureConfig) -> Result<TemperatureSet> {
    if e.m() < 2 {
        return Err(Error::NeedsEnsemble {
            needed: 2,
            got: e.m(),
        });
    }
    // Equal bounds are allowed: they pin every temperature, which is how a
    // config forces identity scaling.
    if config.t_min <= 0.0 || config.t_min > config.t_max {
        return Err(Error::DegenerateInput {
            reason: "temperature bounds must satisfy 0 < t_min <= t_max".to_string(),
        });
    }
    let logs = member_logs(e, DEFAULT_EPSILON);
    let (lo, hi) = (config.t_min.ln(), config.t_max.ln());
    let mut tau = vec![0.0_f64.clamp(lo, hi); e.m()];
    let temps = |tau: &[f64]| -> Vec<f64> { tau.iter().map(|t| t.exp()).collect() };

    let mut current = loss_from_logs(&logs, &temps(&tau), config.lambda);
    let mut trace = vec![current];

    for _ in 0..config.max_steps {
        let grad = grad_from_logs(&logs, &temps(&tau), config.lambda);
        let mut accepted = None;
        let mut scale = config.lr;
        for _ in 0..60 {
            let candidate: Vec<f64> = tau
                .iter()
                .zip(&grad)
                .map(|(t, g)| (t - scale * g).clamp(lo, hi))
                .collect();
            if candidate == tau {
                break;
            }
            let loss = loss_from_logs(&logs, &temps(&candidate), config.lambda);
            if loss <= current {
                accepted = Some((candidate, loss));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, loss)) = accepted else { break };
        let improvement = current - loss;
        tau = next;
        current = loss;
        trace.push(current);
        if improvement < config.tol || improvement == 0.0 {
            break;
        }
    }

    Ok(TemperatureSet {
        temps: temps(&tau),
        lambda: config.lambda,
        loss_trace: trace,
    })
}

/// The ensemble with each member's rows re-softened at its temperature:
/// `p~_m = softmax(ln(smooth(p_m)) / T_m)`.
pub fn temperature_scale(e: &Ensemble, temps: &[f64]) -> Result<Ensemble> {
    check_temps(e, temps)?;
    let logs = member_logs(e, DEFAULT_EPSILON);
    let members = e
        .members()
        .iter()
        .enumerate()
        .map(|(j, member)| {
            let rows = logs[j]
                .iter()
                .map(|l| {
                    Distribution::new(softmax(
                        &l.iter().map(|v| v / temps[j]).collect::<Vec<_>>(),
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            SoftLabelMatrix::new(member.method_name.clone(), member.item_ids.clone(), rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// Average of the temperature-scaled ensemble.
pub fn aggregate_temperature(e: &Ensemble, t: &TemperatureSet) -> Result<SoftLabelMatrix> {
    let scaled = temperature_scale(e, &t.temps)?;
    Ok(aggregate_average(&scaled)?.renamed("temperature"))
}

/// Jensen-Shannon centroid of the temperature-scaled ensemble.
pub fn aggregate_hybrid(
    e: &Ensemble,
    t: &TemperatureSet,
    config: &CentroidConfig,
) -> Result<SoftLabelMatrix> {
    let scaled = temperature_scale(e, &t.temps)?;
    Ok(js_centroid(&scaled, config)?.renamed("hybrid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(name: &str, rows: Vec<Vec<f64>>) -> SoftLabelMatrix {
        let ids = (0..rows.len()).map(|i| format!("i{i}")).collect();
        SoftLabelMatrix::new(
            name,
            ids,
            rows.into_iter().map(|r| Distribution::new(r).unwrap()).collect(),
        )
        .unwrap()
    }

    fn ensemble(rows_per_member: Vec<Vec<Vec<f64>>>) -> Ensemble {
        let members = rows_per_member
            .into_iter()
            .enumerate()
            .map(|(i, rows)| matrix(&format!("m{i}"), rows))
            .collect();
        Ensemble::new(members).unwrap()
    }

    /// Exhaustive K=2 reference: the q minimizing the summed JSD on a grid.
    fn grid_centroid(members: &[Vec<f64>], step: f64) -> Vec<f64> {
        let mut best = (f64::INFINITY, 0.0);
        let mut q0 = 0.0;
        while q0 <= 1.0 {
            let q = [q0, 1.0 - q0];
            let obj: f64 = members.iter().map(|p| js_divergence(p, &q)).sum();
            if obj < best.0 {
                best = (obj, q0);
            }
            q0 += step;
        }
        vec![best.1, 1.0 - best.1]
    }

    #[test]
    fn average_of_opposed_one_hots_is_uniform() {
        let e = ensemble(vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]]);
        let out = aggregate_average(&e).unwrap();
        assert_eq!(out.rows[0].probs(), &[0.5, 0.5]);
    }

    #[test]
    fn average_is_idempotent_on_identical_members() {
        let rows = vec![vec![0.3, 0.7], vec![0.9, 0.1]];
        let e = ensemble(vec![rows.clone(), rows.clone(), rows.clone()]);
        let out = aggregate_average(&e).unwrap();
        for (row, want) in out.rows.iter().zip(&rows) {
            for (p, w) in row.probs().iter().zip(want) {
                assert!((p - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn average_is_the_arithmetic_mean() {
        let e = ensemble(vec![
            vec![vec![0.6, 0.4]],
            vec![vec![0.8, 0.2]],
            vec![vec![0.4, 0.6]],
        ]);
        let out = aggregate_average(&e).unwrap();
        assert!((out.rows[0].probs()[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn mismatched_items_are_rejected() {
        let a = matrix("a", vec![vec![0.5, 0.5]]);
        let mut b = matrix("b", vec![vec![0.5, 0.5]]);
        b.item_ids[0] = "other".to_string();
        assert!(matches!(
            Ensemble::new(vec![a, b]),
            Err(Error::EnsembleMismatch { .. })
        ));
    }

    #[test]
    fn centroid_of_a_symmetric_pair_is_the_midpoint() {
        let e = ensemble(vec![vec![vec![0.8, 0.2]], vec![vec![0.2, 0.8]]]);
        let out = js_centroid(&e, &CentroidConfig::default()).unwrap();
        assert!((out.rows[0].probs()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn centroid_of_one_member_is_that_member() {
        let member = matrix("only", vec![vec![0.9, 0.1], vec![0.25, 0.75]]);
        let e = Ensemble::new(vec![member.clone()]).unwrap();
        let out = js_centroid(&e, &CentroidConfig::default()).unwrap();
        assert_eq!(out.rows, member.rows);
    }

    #[test]
    fn centroid_matches_grid_search() {
        let members = vec![vec![0.7, 0.3], vec![0.9, 0.1], vec![0.5, 0.5]];
        let e = ensemble(members.iter().map(|r| vec![r.clone()]).collect());
        let out = js_centroid(&e, &CentroidConfig::default()).unwrap();
        let reference = grid_centroid(&members, 1e-4);
        let tv = (out.rows[0].probs()[0] - reference[0]).abs();
        assert!(tv < 1e-3, "total variation {tv}");
    }

    #[test]
    fn centroid_objective_descends_from_the_average() {
        let e = ensemble(vec![
            vec![vec![0.97, 0.02, 0.01]],
            vec![vec![0.1, 0.8, 0.1]],
            vec![vec![0.3, 0.3, 0.4]],
        ]);
        let (_, traces) = js_centroid_with_traces(&e, &CentroidConfig::default()).unwrap();
        for trace in traces {
            assert!(trace.len() >= 2);
            for pair in trace.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-9, "objective rose: {pair:?}");
            }
        }
    }

    #[test]
    fn identical_members_drive_temperatures_to_the_floor() {
        let rows = vec![vec![0.8, 0.2]];
        let e = ensemble(vec![rows.clone(), rows]);
        let config = TemperatureConfig {
            lr: 1.0,
            max_steps: 100_000,
            tol: 0.0,
            ..TemperatureConfig::default()
        };
        let fitted = fit_temperatures(&e, &config).unwrap();
        for t in &fitted.temps {
            assert!((t - config.t_min).abs() <= 1e-3, "temps: {:?}", fitted.temps);
        }
    }

    #[test]
    fn unregularized_disparate_members_hit_the_ceiling() {
        let e = ensemble(vec![vec![vec![0.9, 0.1]], vec![vec![0.1, 0.9]]]);
        let config = TemperatureConfig {
            lambda: 0.0,
            lr: 1.0,
            max_steps: 200_000,
            tol: 0.0,
            ..TemperatureConfig::default()
        };
        let fitted = fit_temperatures(&e, &config).unwrap();
        for t in &fitted.temps {
            assert!(*t >= config.t_max - 1e-6, "temps: {:?}", fitted.temps);
        }
    }

    #[test]
    fn loss_trace_never_increases() {
        let e = ensemble(vec![
            vec![vec![0.7, 0.2, 0.1], vec![0.5, 0.25, 0.25]],
            vec![vec![0.2, 0.6, 0.2], vec![0.1, 0.8, 0.1]],
            vec![vec![0.4, 0.4, 0.2], vec![0.3, 0.4, 0.3]],
        ]);
        let fitted = fit_temperatures(&e, &TemperatureConfig::default()).unwrap();
        for pair in fitted.loss_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "loss rose: {pair:?}");
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let e = ensemble(vec![
            vec![vec![0.7, 0.2, 0.1]],
            vec![vec![0.2, 0.6, 0.2]],
            vec![vec![0.25, 0.25, 0.5]],
        ]);
        let temps = [0.8, 1.3, 2.1];
        let lambda = 0.01;
        let grad = temperature_grad(&e, &temps, lambda).unwrap();
        let h = 1e-6;
        for j in 0..temps.len() {
            let mut up = temps.to_vec();
            let mut down = temps.to_vec();
            up[j] = (temps[j].ln() + h).exp();
            down[j] = (temps[j].ln() - h).exp();
            let fd = (temperature_loss(&e, &up, lambda).unwrap()
                - temperature_loss(&e, &down, lambda).unwrap())
                / (2.0 * h);
            let rel = (grad[j] - fd).abs() / fd.abs().max(1e-12);
            assert!(rel < 1e-4, "tau_{j}: analytic {} vs fd {fd}", grad[j]);
        }
    }

    #[test]
    fn unit_temperatures_reduce_to_the_average() {
        let e = ensemble(vec![
            vec![vec![0.6, 0.4], vec![0.15, 0.85]],
            vec![vec![0.3, 0.7], vec![0.5, 0.5]],
        ]);
        let t = TemperatureSet::fixed(vec![1.0, 1.0], 0.01);
        let scaled = aggregate_temperature(&e, &t).unwrap();
        let plain = aggregate_average(&e).unwrap();
        for (s, p) in scaled.rows.iter().zip(&plain.rows) {
            for (a, b) in s.probs().iter().zip(p.probs()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn extreme_temperature_flattens_everything() {
        let e = ensemble(vec![
            vec![vec![0.7, 0.2, 0.1]],
            vec![vec![0.1, 0.6, 0.3]],
        ]);
        let t = TemperatureSet::fixed(vec![100.0, 100.0], 0.01);
        let out = aggregate_temperature(&e, &t).unwrap();
        for p in out.rows[0].probs() {
            assert!((p - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn scaling_preserves_member_argmaxes() {
        let e = ensemble(vec![
            vec![vec![0.7, 0.2, 0.1], vec![0.2, 0.3, 0.5]],
            vec![vec![0.1, 0.6, 0.3], vec![0.4, 0.35, 0.25]],
        ]);
        let scaled = temperature_scale(&e, &[0.3, 7.0]).unwrap();
        for (member, orig) in scaled.members().iter().zip(e.members()) {
            assert_eq!(member.argmax_labels(), orig.argmax_labels());
        }
    }

    #[test]
    fn hybrid_at_unit_temperature_is_the_centroid() {
        let e = ensemble(vec![
            vec![vec![0.7, 0.3], vec![0.25, 0.75]],
            vec![vec![0.9, 0.1], vec![0.4, 0.6]],
            vec![vec![0.5, 0.5], vec![0.1, 0.9]],
        ]);
        let t = TemperatureSet::fixed(vec![1.0; 3], 0.01);
        let hybrid = aggregate_hybrid(&e, &t, &CentroidConfig::default()).unwrap();
        let centroid = js_centroid(&e, &CentroidConfig::default()).unwrap();
        for (h, c) in hybrid.rows.iter().zip(&centroid.rows) {
            for (a, b) in h.probs().iter().zip(c.probs()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fitting_needs_at_least_two_members() {
        let e = Ensemble::new(vec![matrix("only", vec![vec![0.5, 0.5]])]).unwrap();
        assert!(matches!(
            fit_temperatures(&e, &TemperatureConfig::default()),
            Err(Error::NeedsEnsemble { needed: 2, got: 1 })
        ));
    }
}
