//! The `synth` command: spec JSON in, annotations + gold + vocabulary out.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use crowdlab::synth::{generate_crowd, CrowdSpec};

#[derive(Args)]
pub struct SynthArgs {
    /// Crowd spec JSON.
    #[arg(long)]
    spec: PathBuf,

    /// Directory receiving annotations.csv, gold.csv, and vocabulary.txt.
    #[arg(long)]
    out_dir: PathBuf,
}

pub fn run(args: SynthArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading crowd spec `{}`", args.spec.display()))?;
    let spec: CrowdSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing crowd spec `{}`", args.spec.display()))?;
    let crowd = generate_crowd(&spec)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating `{}`", args.out_dir.display()))?;
    crowd
        .annotations
        .save_long_csv(args.out_dir.join("annotations.csv"))?;
    crowd.truth.save_csv(
        args.out_dir.join("gold.csv"),
        crowd.annotations.items(),
        crowd.annotations.vocabulary(),
    )?;
    // The vocabulary file pins label indices even if some label never got
    // sampled, so downstream commands need not rely on inference.
    crowd
        .annotations
        .vocabulary()
        .save(args.out_dir.join("vocabulary.txt"))?;
    Ok(())
}
