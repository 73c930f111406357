//! Batch runner for non-Hermitian diffusion experiments: a JSON config in,
//! CSV/JSON artefacts and a checksummed manifest out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

pub use config::{parse_config, ExperimentConfig};
pub use error::CliError;
pub use output::{verify_manifest, RunManifest};

use output::OutputSet;

/// Runs one experiment into `cfg.output_dir` and writes its manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let started = chrono::Utc::now();
    let mut out = OutputSet::create(&cfg.output_dir)?;
    commands::dispatch(cfg, &mut out)?;
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: format!("{:?}", cfg.command).to_lowercase(),
        config: serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?,
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        outputs: out.files().to_vec(),
    };
    manifest.write(out.dir())?;
    Ok(manifest)
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}
