//! The `aggregate` command: several aligned soft-label files in, one out.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crowdlab::aggregate::{
    aggregate_average, aggregate_hybrid, aggregate_temperature, fit_temperatures, js_centroid,
    CentroidConfig, Ensemble, TemperatureConfig,
};

use crate::input;

#[derive(Args)]
pub struct AggregateArgs {
    /// Soft-label files to fuse; all must share items and labels.
    #[arg(long, num_args = 2.., required = true)]
    inputs: Vec<PathBuf>,

    #[arg(long, value_enum)]
    method: AggMethod,

    /// Override for the temperature regularization constant.
    #[arg(long)]
    lambda: Option<f64>,

    /// JSON config with `centroid` and `temperature` sections.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output soft-label CSV.
    #[arg(long)]
    out: PathBuf,

    /// Fitted-temperature JSON, written by temperature and hybrid
    /// (default: the output path with extension `temps.json`).
    #[arg(long)]
    temps_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggMethod {
    Average,
    Centroid,
    Temperature,
    Hybrid,
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AggregateConfig {
    centroid: CentroidConfig,
    temperature: TemperatureConfig,
}

pub fn run(args: AggregateArgs) -> Result<()> {
    let (matrices, vocabulary) = input::load_soft_labels(&args.inputs)?;
    let ensemble = Ensemble::new(matrices).context("aggregation inputs disagree")?;

    let mut config: AggregateConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config `{}`", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config `{}`", path.display()))?
        }
        None => AggregateConfig::default(),
    };
    if let Some(lambda) = args.lambda {
        config.temperature.lambda = lambda;
    }

    let fused = match args.method {
        AggMethod::Average => aggregate_average(&ensemble)?,
        AggMethod::Centroid => js_centroid(&ensemble, &config.centroid)?,
        AggMethod::Temperature | AggMethod::Hybrid => {
            let temps = fit_temperatures(&ensemble, &config.temperature)?;
            let temps_path = args
                .temps_out
                .clone()
                .unwrap_or_else(|| args.out.with_extension("temps.json"));
            input::ensure_parent(&temps_path)?;
            crowdlab::io::write_temperature_set(&temps, &temps_path)
                .with_context(|| format!("writing `{}`", temps_path.display()))?;
            match args.method {
                AggMethod::Temperature => aggregate_temperature(&ensemble, &temps)?,
                _ => aggregate_hybrid(&ensemble, &temps, &config.centroid)?,
            }
        }
    };

    input::ensure_parent(&args.out)?;
    crowdlab::io::write_soft_labels(&fused, &vocabulary, &args.out)
        .with_context(|| format!("writing `{}`", args.out.display()))?;
    Ok(())
}
