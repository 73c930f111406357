//! Monte Carlo fields and eigenvalue scatter.

use nhdiff_core::mc::EnsembleConfig;
use nhdiff_core::observables::{fields_from_run, sample_trial};
use rayon::prelude::*;
use serde_json::json;

use super::per_tau;
use crate::config::{ExperimentConfig, Extras};
use crate::error::{at, CliError};
use crate::output::{num, OutputSet};

pub fn run(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let Extras::Simulate(extras) = &cfg.extras else { unreachable!("extras match the command") };
    let x0 = cfg.build_initial(cfg.initial.as_ref().expect("validated"))?;
    let ens = EnsembleConfig::new(cfg.n(), cfg.tau_list.clone(), cfg.trials, cfg.seed).map_err(at("ensemble config"))?;
    let grid = cfg.grid_spec();
    let run = (0..cfg.trials)
        .into_par_iter()
        .map(|t| sample_trial(&x0, &ens, t).map_err(at(format!("trial {t} (seed {})", cfg.seed))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = Vec::new();
    for (k, &tau) in cfg.tau_list.iter().enumerate() {
        let field = fields_from_run(&run, k, grid).map_err(at(format!("fields at tau = {tau}")))?;
        out.write_csv(
            &per_tau("field", k),
            &["x", "y", "rho", "overlap"],
            field.rows().map(|(x, y, r, o)| [num(x), num(y), num(r), num(o)]),
        )?;
        if extras.scatter {
            let rows = run.iter().enumerate().flat_map(|(t, trial)| {
                trial[k].iter().flat_map(move |s| {
                    s.eigenvalues.iter().zip(&s.overlaps).map(move |(l, o)| [t.to_string(), num(l.re), num(l.im), num(*o)])
                })
            });
            out.write_csv(&per_tau("scatter", k), &["trial", "x", "y", "overlap"], rows)?;
        }
        summary.push(json!({
            "tau": tau,
            "trials_used": field.trials_used,
            "dropped": field.dropped,
            "spill": field.spill,
            "total_mass": field.total_mass(),
            "overlap_integral": field.overlap_integral(),
        }));
    }
    out.write_json("simulate_summary.json", &json!({ "n": cfg.n(), "trials": cfg.trials, "times": summary }))
}
