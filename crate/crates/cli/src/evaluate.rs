//! The `evaluate` command: a JSON metrics report over soft labels or logits.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use crowdlab::aggregate::Ensemble;
use crowdlab::annotation::{GoldLabels, LabelVocabulary};
use crowdlab::metrics::{
    accuracy_vs_gold, calibrated_log_likelihood, centroid_proximity, f1_scores,
    pairwise_jsd_matrix, Averaging, CllConfig, PredictionSet,
};
use crowdlab::SoftLabelMatrix;

use crate::input;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Soft-label files to score.
    #[arg(long, num_args = 1..)]
    soft_labels: Vec<PathBuf>,

    /// Classifier logits CSV, `item_id,l_<label>,..` (drives `cll`).
    #[arg(long)]
    logits: Option<PathBuf>,

    /// Gold labels CSV.
    #[arg(long)]
    gold: PathBuf,

    /// Comma-separated metrics, or `all` for every applicable one.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    metrics: Vec<MetricKind>,

    /// Aggregate treated as the reference point by `proximity`.
    #[arg(long)]
    centroid: Option<PathBuf>,

    /// Seed for the cll calibration splits.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// JSON report path.
    #[arg(long)]
    out: PathBuf,

    /// JSD matrix CSV path (default: the report path with `jsd.csv`).
    #[arg(long)]
    jsd_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricKind {
    F1,
    Accuracy,
    Cll,
    #[value(name = "jsd_matrix")]
    JsdMatrix,
    Proximity,
    All,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    if args.soft_labels.is_empty() && args.logits.is_none() {
        bail!("nothing to evaluate: pass --soft-labels and/or --logits");
    }

    let (matrices, soft_vocab) = if args.soft_labels.is_empty() {
        (Vec::new(), None)
    } else {
        let (m, v) = input::load_soft_labels(&args.soft_labels)?;
        (m, Some(v))
    };
    let logits = args
        .logits
        .as_ref()
        .map(|path| {
            crowdlab::io::read_logits(path)
                .with_context(|| format!("reading logits from `{}`", path.display()))
        })
        .transpose()?;

    let vocabulary: &LabelVocabulary = match (&soft_vocab, &logits) {
        (Some(v), _) => v,
        (None, Some((_, _, v))) => v,
        (None, None) => unreachable!("one input source is required"),
    };
    if let (Some(v), Some((_, _, lv))) = (&soft_vocab, &logits) {
        if v != lv {
            bail!(
                "--logits is over labels {:?} but --soft-labels use {:?}",
                lv.labels(),
                v.labels(),
            );
        }
    }
    let gold = GoldLabels::load_csv(&args.gold, vocabulary)
        .with_context(|| format!("reading gold labels from `{}`", args.gold.display()))?;

    let all = args.metrics.contains(&MetricKind::All);
    let wants = |kind: MetricKind| all || args.metrics.contains(&kind);
    // Under `all`, a metric whose inputs were not supplied is skipped; a
    // metric named explicitly must be computable.
    let explicit = |kind: MetricKind| args.metrics.contains(&kind);

    let mut report = Map::new();

    if wants(MetricKind::Accuracy) && !matrices.is_empty() {
        let mut section = Map::new();
        for m in &matrices {
            section.insert(m.method_name.clone(), json!(accuracy_vs_gold(m, &gold)?));
        }
        report.insert("accuracy".to_string(), Value::Object(section));
    } else if explicit(MetricKind::Accuracy) {
        bail!("accuracy needs --soft-labels");
    }

    if wants(MetricKind::F1) && !matrices.is_empty() {
        let mut section = Map::new();
        for m in &matrices {
            let (pred, truth) = aligned(m, &gold);
            let mut entry = Map::new();
            entry.insert(
                "macro".to_string(),
                serde_json::to_value(f1_scores(&pred, &truth, Averaging::Macro)?)?,
            );
            if m.k() == 2 {
                entry.insert(
                    "binary".to_string(),
                    serde_json::to_value(f1_scores(&pred, &truth, Averaging::Binary)?)?,
                );
            }
            section.insert(m.method_name.clone(), Value::Object(entry));
        }
        report.insert("f1".to_string(), Value::Object(section));
    } else if explicit(MetricKind::F1) {
        bail!("f1 needs --soft-labels");
    }

    if let (true, Some((ids, rows, _))) = (wants(MetricKind::Cll), &logits) {
        let predictions = PredictionSet::new(ids.clone(), rows.clone(), &gold)
            .context("building the prediction set for cll")?;
        let config = CllConfig {
            seed: args.seed,
            ..CllConfig::default()
        };
        let cll = calibrated_log_likelihood(&predictions, &config)?;
        report.insert("cll".to_string(), json!(cll));
    } else if explicit(MetricKind::Cll) {
        bail!("cll needs --logits");
    }

    if wants(MetricKind::JsdMatrix) && matrices.len() >= 2 {
        let ensemble = Ensemble::new(matrices.clone()).context("soft-label inputs disagree")?;
        let matrix = pairwise_jsd_matrix(&ensemble, &[])?;
        let csv_path = args
            .jsd_out
            .clone()
            .unwrap_or_else(|| args.out.with_extension("jsd.csv"));
        input::ensure_parent(&csv_path)?;
        crowdlab::io::write_jsd_matrix(&matrix, &csv_path)
            .with_context(|| format!("writing `{}`", csv_path.display()))?;
        report.insert("jsd_matrix".to_string(), serde_json::to_value(&matrix)?);
    } else if explicit(MetricKind::JsdMatrix) {
        bail!("jsd_matrix needs at least 2 --soft-labels files");
    }

    if let (true, Some(centroid_path)) = (wants(MetricKind::Proximity), &args.centroid) {
        let (q, q_vocab) = crowdlab::io::read_soft_labels(centroid_path)
            .with_context(|| format!("reading centroid from `{}`", centroid_path.display()))?;
        if Some(&q_vocab) != soft_vocab.as_ref() {
            bail!("--centroid must share the soft-label vocabulary");
        }
        let ensemble = Ensemble::new(matrices.clone()).context("soft-label inputs disagree")?;
        let prox = centroid_proximity(&ensemble, &q)?;
        let mut section = serde_json::to_value(&prox)?;
        let names: Vec<&str> = matrices.iter().map(|m| m.method_name.as_str()).collect();
        section
            .as_object_mut()
            .expect("proximity report serializes to an object")
            .insert("methods".to_string(), json!(names));
        report.insert("proximity".to_string(), section);
    } else if explicit(MetricKind::Proximity) {
        bail!("proximity needs --centroid and at least 3 --soft-labels files");
    }

    input::ensure_parent(&args.out)?;
    crowdlab::io::write_json(&Value::Object(report), &args.out)
        .with_context(|| format!("writing `{}`", args.out.display()))?;
    Ok(())
}

/// Argmax predictions paired with gold over the items both sides cover.
fn aligned(m: &SoftLabelMatrix, gold: &GoldLabels) -> (Vec<usize>, Vec<usize>) {
    m.item_ids
        .iter()
        .zip(m.argmax_labels())
        .filter_map(|(id, p)| gold.get(id).map(|g| (p, g)))
        .unzip()
}
