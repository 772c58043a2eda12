//! The `label` command: annotations in, one soft-label file per method out.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crowdlab::annotation::{vote_counts, AnnotationFormat, AnnotationSet, LabelVocabulary};
use crowdlab::soft_label::{softmax_normalize, standard_normalize};
use crowdlab::truth::{dawid_skene_fit, mace_fit, DawidSkeneConfig, MaceConfig};

#[derive(Args)]
pub struct LabelArgs {
    /// Raw annotations file.
    #[arg(long)]
    input: PathBuf,

    /// Input format.
    #[arg(long, value_enum, default_value_t = Format::LongCsv)]
    format: Format,

    /// Comma-separated methods to run, or `all`.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    methods: Vec<Method>,

    /// Fixed label vocabulary, one label per line (otherwise inferred
    /// from the input in lexicographic order).
    #[arg(long)]
    vocabulary: Option<PathBuf>,

    /// JSON file with `ds` and `mace` sections overriding model defaults.
    #[arg(long)]
    model_config: Option<PathBuf>,

    /// Directory receiving `<method>.csv` plus model dumps for ds/mace.
    #[arg(long)]
    out_dir: PathBuf,

    /// Seed for the MACE restart draws (overrides the config file).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    LongCsv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Standard,
    Softmax,
    Ds,
    Mace,
    All,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Softmax => "softmax",
            Method::Ds => "ds",
            Method::Mace => "mace",
            Method::All => "all",
        }
    }
}

/// Expands `all` and drops duplicates, keeping a fixed run order.
fn resolve(requested: &[Method]) -> Vec<Method> {
    let everything = [Method::Standard, Method::Softmax, Method::Ds, Method::Mace];
    if requested.contains(&Method::All) {
        return everything.to_vec();
    }
    everything
        .into_iter()
        .filter(|m| requested.contains(m))
        .collect()
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelConfig {
    ds: DawidSkeneConfig,
    mace: MaceConfig,
}

pub fn run(args: LabelArgs) -> Result<()> {
    let vocabulary = args
        .vocabulary
        .as_ref()
        .map(|path| {
            LabelVocabulary::load(path)
                .with_context(|| format!("reading vocabulary from `{}`", path.display()))
        })
        .transpose()?;
    let format = match args.format {
        Format::LongCsv => AnnotationFormat::LongCsv,
        Format::Json => AnnotationFormat::Json,
    };
    let set = AnnotationSet::load_with_vocabulary(&args.input, format, vocabulary)
        .with_context(|| format!("reading annotations from `{}`", args.input.display()))?;

    let mut config: ModelConfig = match &args.model_config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading model config `{}`", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing model config `{}`", path.display()))?
        }
        None => ModelConfig::default(),
    };
    config.mace.seed = args.seed;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating `{}`", args.out_dir.display()))?;
    let votes = vote_counts(&set);

    for method in resolve(&args.methods) {
        let labels = match method {
            Method::Standard => standard_normalize(&votes)?,
            Method::Softmax => softmax_normalize(&votes)?,
            Method::Ds => {
                let model = dawid_skene_fit(&set, &config.ds)?;
                crowdlab::io::write_json(
                    &serde_json::json!({"annotators": set.annotators(), "model": model}),
                    args.out_dir.join("ds_model.json"),
                )?;
                model.posteriors
            }
            Method::Mace => {
                let model = mace_fit(&set, &config.mace)?;
                crowdlab::io::write_json(
                    &serde_json::json!({"annotators": set.annotators(), "model": model}),
                    args.out_dir.join("mace_model.json"),
                )?;
                model.posteriors
            }
            Method::All => unreachable!("resolve() expands `all`"),
        };
        let path = args.out_dir.join(format!("{}.csv", method.name()));
        crowdlab::io::write_soft_labels(&labels, set.vocabulary(), &path)
            .with_context(|| format!("writing `{}`", path.display()))?;
    }
    Ok(())
}
