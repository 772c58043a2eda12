//! File formats: soft-label and logits CSVs, temperature-set JSON, and the
//! pairwise-JSD matrix CSV.
//!
//! Probabilities and logits are written with 12 significant digits, so a
//! read-back matches the in-memory values within 1e-12.

use std::path::Path;

use serde::Serialize;

use crate::annotation::LabelVocabulary;
use crate::aggregate::TemperatureSet;
use crate::dist::{Distribution, SoftLabelMatrix};
use crate::error::{Error, Result};
use crate::metrics::JsdMatrix;

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_value_csv(
    path: &Path,
    prefix: &str,
    vocab: &LabelVocabulary,
    item_ids: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["item_id".to_string()];
    header.extend(vocab.labels().iter().map(|l| format!("{prefix}{l}")));
    writer.write_record(&header)?;
    for (id, row) in item_ids.iter().zip(rows) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|&v| sig12(v)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

fn read_value_csv(path: &Path, prefix: &str) -> Result<(Vec<String>, Vec<Vec<f64>>, LabelVocabulary)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let labels: Vec<String> = {
        let headers = reader.headers()?;
        let mut cols = headers.iter();
        if cols.next() != Some("item_id") {
            return Err(Error::Parse {
                line: 1,
                reason: "first column must be `item_id`".to_string(),
            });
        }
        cols.map(|c| {
            c.strip_prefix(prefix)
                .map(String::from)
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    reason: format!("column `{c}` does not start with `{prefix}`"),
                })
        })
        .collect::<Result<Vec<_>>>()?
    };
    let vocab = LabelVocabulary::new(labels)?;

    let mut item_ids = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != vocab.k() + 1 {
            return Err(Error::Parse {
                line,
                reason: format!("expected {} fields, got {}", vocab.k() + 1, record.len()),
            });
        }
        item_ids.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    reason: format!("bad number `{v}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput {
            path: path.display().to_string(),
        });
    }
    Ok((item_ids, rows, vocab))
}

/// Writes `item_id,p_<label>,..` with one row per item.
pub fn write_soft_labels(
    m: &SoftLabelMatrix,
    vocab: &LabelVocabulary,
    path: impl AsRef<Path>,
) -> Result<()> {
    if vocab.k() != m.k() {
        return Err(Error::LengthMismatch {
            left: vocab.k(),
            right: m.k(),
        });
    }
    write_value_csv(
        path.as_ref(),
        "p_",
        vocab,
        &m.item_ids,
        m.rows.iter().map(|r| r.probs().to_vec()),
    )
}

/// Reads a soft-label CSV; the matrix takes its method name from the file
/// stem.
pub fn read_soft_labels(path: impl AsRef<Path>) -> Result<(SoftLabelMatrix, LabelVocabulary)> {
    let path = path.as_ref();
    let (item_ids, rows, vocab) = read_value_csv(path, "p_")?;
    let rows = rows
        .into_iter()
        .map(Distribution::new)
        .collect::<Result<Vec<_>>>()?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "soft_labels".to_string());
    let matrix = SoftLabelMatrix::new(name, item_ids, rows)?;
    Ok((matrix, vocab))
}

/// Writes `item_id,l_<label>,..` rows of raw classifier logits.
pub fn write_logits(
    item_ids: &[String],
    logits: &[Vec<f64>],
    vocab: &LabelVocabulary,
    path: impl AsRef<Path>,
) -> Result<()> {
    if item_ids.len() != logits.len() {
        return Err(Error::LengthMismatch {
            left: item_ids.len(),
            right: logits.len(),
        });
    }
    write_value_csv(
        path.as_ref(),
        "l_",
        vocab,
        item_ids,
        logits.iter().cloned(),
    )
}

pub fn read_logits(
    path: impl AsRef<Path>,
) -> Result<(Vec<String>, Vec<Vec<f64>>, LabelVocabulary)> {
    read_value_csv(path.as_ref(), "l_")
}

#[derive(Serialize)]
struct TemperatureDump<'a> {
    temps: &'a [f64],
    lambda: f64,
    final_loss: f64,
}

/// Writes the fitted temperatures as `{temps, lambda, final_loss}`.
pub fn write_temperature_set(t: &TemperatureSet, path: impl AsRef<Path>) -> Result<()> {
    write_json(
        &TemperatureDump {
            temps: &t.temps,
            lambda: t.lambda,
            final_loss: t.final_loss(),
        },
        path,
    )
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json(value: &impl Serialize, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes the matrix as CSV: corner cell `method`, one named row per method.
pub fn write_jsd_matrix(m: &JsdMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec!["method".to_string()];
    header.extend(m.method_names.iter().cloned());
    writer.write_record(&header)?;
    for (name, row) in m.method_names.iter().zip(&m.values) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(|&v| sig12(v)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
