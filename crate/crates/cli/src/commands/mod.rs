mod aecp;
mod asympt;
mod compare;
mod kernel;
mod simulate;
mod solve;

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;
use crate::output::OutputSet;

pub fn dispatch(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    match cfg.command {
        Command::Simulate => simulate::run(cfg, out),
        Command::Solve => solve::run(cfg, out),
        Command::Aecp => aecp::run(cfg, out),
        Command::Kernel => kernel::run(cfg, out),
        Command::Asympt => asympt::run(cfg, out),
        Command::Compare => compare::run(cfg, out),
    }
}

/// `k` evenly spaced points from `a` to `b` inclusive.
pub(crate) fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

pub(crate) fn per_tau(stem: &str, k: usize) -> String {
    format!("{stem}_tau{k}.csv")
}
