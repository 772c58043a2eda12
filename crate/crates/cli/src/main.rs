//! `crowdlab`: soft labels from crowd annotations.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod aggregate;
mod evaluate;
mod input;
mod label;
mod synth;

#[derive(Parser)]
#[command(
    name = "crowdlab",
    version,
    about = "Crowd annotations to soft labels: per-method labeling, ensemble \
             aggregation, evaluation, and synthetic crowds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Produce per-method soft labels from raw annotations.
    Label(label::LabelArgs),
    /// Fuse aligned soft-label files into a single view.
    Aggregate(aggregate::AggregateArgs),
    /// Score soft labels or logits against gold labels.
    Evaluate(evaluate::EvaluateArgs),
    /// Sample a synthetic crowd with known ground truth.
    Synth(synth::SynthArgs),
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems are input errors (exit 1); --help and
            // --version are not errors at all.
            let failed = err.use_stderr();
            let _ = err.print();
            return ExitCode::from(if failed { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Label(args) => label::run(args),
        Command::Aggregate(args) => aggregate::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Synth(args) => synth::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 for input and configuration problems, 2 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<crowdlab::Error>(),
            Some(crowdlab::Error::NumericalFailure { .. })
        )
    });
    if numerical {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::exit_code;

    #[test]
    fn numerical_failures_exit_two_even_under_context() {
        let err = anyhow::Error::new(crowdlab::Error::NumericalFailure {
            reason: "non-finite update".to_string(),
        })
        .context("fitting temperatures");
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn everything_else_exits_one() {
        let err = anyhow::Error::new(crowdlab::Error::EmptyEvaluation);
        assert_eq!(exit_code(&err), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("bad flag value")), 1);
    }
}
