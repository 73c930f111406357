use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nhdiff_cli::{load_config, run_experiment, CliError};

/// Runs a diffusion experiment described by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "nhdiff", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// RNG seed, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(dir) = args.output {
        cfg.output_dir = dir;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(CliError::Config("`--threads` must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    let manifest = run_experiment(&cfg)?;
    eprintln!("wrote {} files to {}", manifest.outputs.len() + 1, cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nhdiff: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
