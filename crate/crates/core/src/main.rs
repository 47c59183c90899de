use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use horolab::experiments::{run, Experiment, ExperimentConfig};

/// Horocycle and Patterson–Sullivan experiments on Fuchsian groups.
#[derive(Parser, Debug)]
#[command(name = "horolab", version)]
struct Cli {
    /// group-info, exponent, patterson, equidist, mixing, nondiv, closure or checks
    experiment: String,
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding `[run] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Single-worker accumulation; recorded in the manifest.
    #[arg(long)]
    deterministic: bool,
    /// `key=value` or `section.key=value`, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(experiment) = Experiment::parse(&cli.experiment) else {
        let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
        eprintln!("error: unknown experiment `{}` (one of {})", cli.experiment, names.join(", "));
        return ExitCode::from(1);
    };
    let result = ExperimentConfig::load(
        &cli.config,
        experiment,
        &cli.overrides,
        cli.seed,
        cli.out,
        cli.deterministic,
    )
    .and_then(|cfg| run(&cfg).map(|r| (cfg, r)));
    match result {
        Ok((cfg, report)) => {
            for line in &report.summary {
                println!("{line}");
            }
            println!("wrote {} files to {}", report.files.len() + 1, cfg.out.display());
            if report.failed {
                eprintln!("some checks failed");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
