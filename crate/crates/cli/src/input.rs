//! Shared loading for commands that consume soft-label files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use crowdlab::{LabelVocabulary, SoftLabelMatrix};

/// Creates the directory an output file will land in.
pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating `{}`", parent.display()))?;
        }
    }
    Ok(())
}

/// Loads soft-label files and checks that they carry the same vocabulary.
/// Item alignment is checked later, by `Ensemble::new`.
pub fn load_soft_labels(paths: &[PathBuf]) -> Result<(Vec<SoftLabelMatrix>, LabelVocabulary)> {
    let mut matrices: Vec<SoftLabelMatrix> = Vec::with_capacity(paths.len());
    let mut vocabulary: Option<(LabelVocabulary, &Path)> = None;
    for path in paths {
        let (matrix, file_vocab) = crowdlab::io::read_soft_labels(path)
            .with_context(|| format!("reading soft labels from `{}`", path.display()))?;
        match &vocabulary {
            None => vocabulary = Some((file_vocab, path)),
            Some((first, first_path)) => {
                if first != &file_vocab {
                    bail!(
                        "`{}` is over labels {:?} but `{}` is over {:?}",
                        path.display(),
                        file_vocab.labels(),
                        first_path.display(),
                        first.labels(),
                    );
                }
            }
        }
        if let Some(previous) = matrices
            .iter()
            .find(|m| m.method_name == matrix.method_name)
        {
            bail!(
                "two inputs would both be reported as `{}`; rename one file",
                previous.method_name,
            );
        }
        matrices.push(matrix);
    }
    let (vocabulary, _) = vocabulary.context("no input files given")?;
    Ok((matrices, vocabulary))
}
