//! Data model and ingestion for crowd annotations, gold labels, and vote
//! counts, plus the majority-vote baseline.
//!
//! Annotations arrive as sparse `(item, annotator, label)` records. The
//! long-CSV format has header `item_id,annotator_id,label`; the JSON format
//! is `{"labels": [...]?, "records": [{"item_id", "annotator_id", "label"}]}`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::argmax;
use crate::error::{Error, Result};

/// The ordered label set shared by every structure downstream.
///
/// Index `i` refers to `labels[i]` everywhere: vote matrices, distributions,
/// confusion matrices, gold labels. Order is lexicographic when inferred
/// from data, or exactly as given when supplied explicitly, and never
/// changes afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVocabulary {
    labels: Vec<String>,
}

impl LabelVocabulary {
    /// Builds a vocabulary with the given label order.
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidVocabulary {
                count: labels.len(),
            });
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidVocabulary {
                count: distinct.len(),
            });
        }
        Ok(Self { labels })
    }

    /// Builds a vocabulary from unordered labels, sorted lexicographically.
    pub fn inferred(labels: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut labels: Vec<String> = labels.into_iter().collect::<HashSet<_>>().into_iter().collect();
        labels.sort();
        Self::new(labels)
    }

    /// Reads one label per line; file order defines the indices.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::fs::File::create(path)?;
        for label in &self.labels {
            writeln!(out, "{label}")?;
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// One crowd annotation: `annotator_id` gave `label_index` to `item_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub item_id: String,
    pub annotator_id: String,
    pub label_index: usize,
}

/// A validated sparse table of crowd annotations.
///
/// Item and annotator lists are ordered by first appearance. Each
/// `(item, annotator)` pair occurs at most once and every item has at
/// least one record.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    records: Vec<AnnotationRecord>,
    vocabulary: LabelVocabulary,
    items: Vec<String>,
    annotators: Vec<String>,
    item_index: HashMap<String, usize>,
    annotator_index: HashMap<String, usize>,
}

/// Supported annotation file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationFormat {
    LongCsv,
    Json,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonAnnotations {
    #[serde(default)]
    labels: Option<Vec<String>>,
    records: Vec<JsonRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    item_id: String,
    annotator_id: String,
    label: String,
}

impl AnnotationSet {
    /// Assembles a set from raw `(item, annotator, label)` triples.
    ///
    /// Rejects duplicate `(item, annotator)` pairs and, when `vocabulary`
    /// is supplied, labels outside it; otherwise the vocabulary is inferred
    /// lexicographically from the distinct labels seen.
    pub fn from_triples(
        triples: Vec<(String, String, String)>,
        vocabulary: Option<LabelVocabulary>,
    ) -> Result<Self> {
        let vocabulary = match vocabulary {
            Some(v) => v,
            None => LabelVocabulary::inferred(triples.iter().map(|(_, _, l)| l.clone()))?,
        };

        let mut records = Vec::with_capacity(triples.len());
        let mut items = Vec::new();
        let mut annotators = Vec::new();
        let mut item_index = HashMap::new();
        let mut annotator_index = HashMap::new();
        let mut seen_pairs = HashSet::new();

        for (item_id, annotator_id, label) in triples {
            let label_index = vocabulary
                .index_of(&label)
                .ok_or(Error::UnknownLabel { label })?;
            if !seen_pairs.insert((item_id.clone(), annotator_id.clone())) {
                return Err(Error::DuplicateAnnotation {
                    item_id,
                    annotator_id,
                });
            }
            if !item_index.contains_key(&item_id) {
                item_index.insert(item_id.clone(), items.len());
                items.push(item_id.clone());
            }
            if !annotator_index.contains_key(&annotator_id) {
                annotator_index.insert(annotator_id.clone(), annotators.len());
                annotators.push(annotator_id.clone());
            }
            records.push(AnnotationRecord {
                item_id,
                annotator_id,
                label_index,
            });
        }

        if records.is_empty() {
            return Err(Error::EmptyInput {
                path: "<records>".to_string(),
            });
        }

        Ok(Self {
            records,
            vocabulary,
            items,
            annotators,
            item_index,
            annotator_index,
        })
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn vocabulary(&self) -> &LabelVocabulary {
        &self.vocabulary
    }

    pub fn k(&self) -> usize {
        self.vocabulary.k()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_annotators(&self) -> usize {
        self.annotators.len()
    }

    pub fn item_position(&self, item_id: &str) -> Option<usize> {
        self.item_index.get(item_id).copied()
    }

    pub fn annotator_position(&self, annotator_id: &str) -> Option<usize> {
        self.annotator_index.get(annotator_id).copied()
    }

    /// Records regrouped per item as `(annotator_position, label_index)`.
    pub fn by_item(&self) -> Vec<Vec<(usize, usize)>> {
        let mut grouped = vec![Vec::new(); self.items.len()];
        for rec in &self.records {
            let i = self.item_index[&rec.item_id];
            let j = self.annotator_index[&rec.annotator_id];
            grouped[i].push((j, rec.label_index));
        }
        grouped
    }

    /// Records regrouped per annotator as `(item_position, label_index)`.
    pub fn by_annotator(&self) -> Vec<Vec<(usize, usize)>> {
        let mut grouped = vec![Vec::new(); self.annotators.len()];
        for rec in &self.records {
            let i = self.item_index[&rec.item_id];
            let j = self.annotator_index[&rec.annotator_id];
            grouped[j].push((i, rec.label_index));
        }
        grouped
    }

    /// Loads annotations from `path`, inferring the vocabulary.
    pub fn load(path: impl AsRef<Path>, format: AnnotationFormat) -> Result<Self> {
        Self::load_with_vocabulary(path, format, None)
    }

    /// Loads annotations from `path` against a fixed vocabulary.
    ///
    /// Labels outside the vocabulary are an [`Error::UnknownLabel`].
    pub fn load_with_vocabulary(
        path: impl AsRef<Path>,
        format: AnnotationFormat,
        vocabulary: Option<LabelVocabulary>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let triples = match format {
            AnnotationFormat::LongCsv => read_long_csv(path)?,
            AnnotationFormat::Json => {
                let parsed: JsonAnnotations = serde_json::from_reader(std::fs::File::open(path)?)?;
                let file_vocab = parsed.labels.map(LabelVocabulary::new).transpose()?;
                let triples: Vec<_> = parsed
                    .records
                    .into_iter()
                    .map(|r| (r.item_id, r.annotator_id, r.label))
                    .collect();
                if triples.is_empty() {
                    return Err(Error::EmptyInput {
                        path: path.display().to_string(),
                    });
                }
                // An explicit argument wins over a vocabulary embedded in the file.
                return Self::from_triples(triples, vocabulary.or(file_vocab));
            }
        };
        if triples.is_empty() {
            return Err(Error::EmptyInput {
                path: path.display().to_string(),
            });
        }
        Self::from_triples(triples, vocabulary)
    }

    /// Writes the long-CSV form; `load` on the output reproduces this set.
    pub fn save_long_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["item_id", "annotator_id", "label"])?;
        for rec in &self.records {
            writer.write_record([
                rec.item_id.as_str(),
                rec.annotator_id.as_str(),
                self.vocabulary.label(rec.label_index),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let doc = JsonAnnotations {
            labels: Some(self.vocabulary.labels().to_vec()),
            records: self
                .records
                .iter()
                .map(|r| JsonRecord {
                    item_id: r.item_id.clone(),
                    annotator_id: r.annotator_id.clone(),
                    label: self.vocabulary.label(r.label_index).to_string(),
                })
                .collect(),
        };
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, &doc)?;
        Ok(())
    }
}

fn read_long_csv(path: &Path) -> Result<Vec<(String, String, String)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    {
        let headers = reader.headers()?;
        let expected = ["item_id", "annotator_id", "label"];
        if headers.iter().ne(expected) {
            return Err(Error::Parse {
                line: 1,
                reason: format!(
                    "expected header `item_id,annotator_id,label`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
    }
    let mut triples = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 3 fields, got {}", row.len()),
            });
        }
        triples.push((row[0].to_string(), row[1].to_string(), row[2].to_string()));
    }
    Ok(triples)
}

/// Per-item vote counts: `counts[i][y]` is how many annotators gave label
/// `y` to item `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteMatrix {
    item_ids: Vec<String>,
    counts: Vec<Vec<u32>>,
    k: usize,
}

impl VoteMatrix {
    pub fn new(item_ids: Vec<String>, counts: Vec<Vec<u32>>, k: usize) -> Result<Self> {
        if item_ids.len() != counts.len() {
            return Err(Error::LengthMismatch {
                left: item_ids.len(),
                right: counts.len(),
            });
        }
        for (id, row) in item_ids.iter().zip(&counts) {
            if row.len() != k {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: k,
                });
            }
            if row.iter().all(|&c| c == 0) {
                return Err(Error::EmptyItem {
                    item_id: id.clone(),
                });
            }
        }
        Ok(Self {
            item_ids,
            counts,
            k,
        })
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_items(&self) -> usize {
        self.counts.len()
    }
}

/// Tallies votes per item and label.
///
/// The sum of all entries equals the number of annotation records.
pub fn vote_counts(annotations: &AnnotationSet) -> VoteMatrix {
    let k = annotations.k();
    let mut counts = vec![vec![0u32; k]; annotations.n_items()];
    for rec in annotations.records() {
        let i = annotations.item_position(&rec.item_id).expect("record item is indexed");
        counts[i][rec.label_index] += 1;
    }
    VoteMatrix {
        item_ids: annotations.items().to_vec(),
        counts,
        k,
    }
}

/// Per-item plurality label; ties break to the lowest label index.
pub fn majority_vote(votes: &VoteMatrix) -> Vec<usize> {
    votes.counts().iter().map(|row| argmax(row)).collect()
}

/// Reference labels for a (possibly partial) subset of items.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoldLabels {
    map: BTreeMap<String, usize>,
}

impl GoldLabels {
    pub fn new(map: BTreeMap<String, usize>) -> Self {
        Self { map }
    }

    pub fn get(&self, item_id: &str) -> Option<usize> {
        self.map.get(item_id).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, usize)> {
        self.map.iter().map(|(k, &v)| (k, v))
    }

    /// Reads the gold CSV format (header `item_id,label`).
    pub fn load_csv(path: impl AsRef<Path>, vocabulary: &LabelVocabulary) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path.as_ref())?;
        let mut map = BTreeMap::new();
        for row in reader.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != 2 {
                return Err(Error::Parse {
                    line,
                    reason: format!("expected 2 fields, got {}", row.len()),
                });
            }
            let index = vocabulary.index_of(&row[1]).ok_or(Error::UnknownLabel {
                label: row[1].to_string(),
            })?;
            map.insert(row[0].to_string(), index);
        }
        Ok(Self { map })
    }

    /// Writes the gold CSV format in `item_ids` order, skipping uncovered items.
    pub fn save_csv(
        &self,
        path: impl AsRef<Path>,
        item_ids: &[String],
        vocabulary: &LabelVocabulary,
    ) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["item_id", "label"])?;
        for id in item_ids {
            if let Some(index) = self.get(id) {
                writer.write_record([id.as_str(), vocabulary.label(index)])?;
            }
        }
        writer.flush()?;
        Ok(())
    }
}

impl FromIterator<(String, usize)> for GoldLabels {
    fn from_iter<T: IntoIterator<Item = (String, usize)>>(iter: T) -> Self {
        Self {
            map: iter.into_iter().collect(),
        }
    }
}
