//! Closed forms vs the general large-`n` solver vs Monte Carlo.

use nhdiff_core::largen::{closed_example, large_n_realization, ClosedExample, Family, LargeNPoint, LargeNSolver};
use nhdiff_core::mc::EnsembleConfig;
use nhdiff_core::observables::{fields_from_run, sample_ensemble, FieldGrid, GridSpec};
use nhdiff_core::{build_initial, Complex64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Extras, FamilyName};
use crate::error::{at, CliError};
use crate::output::{num, OutputSet};

/// Points with support level below `-INTERIOR_MARGIN·τ` count as interior.
const INTERIOR_MARGIN: f64 = 0.05;

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn family_of(name: FamilyName, a: Complex64, alpha: Complex64) -> Family {
    match name {
        FamilyName::Ginibre => Family::Ginibre,
        FamilyName::Spiric => Family::Spiric(a),
        FamilyName::Jordan => Family::Jordan(alpha),
    }
}

fn extent(family: Family, tau: f64) -> f64 {
    let p = match family {
        Family::Ginibre => 0.0,
        Family::Spiric(c) | Family::Jordan(c) => c.norm(),
    };
    1.15 * (p * p + tau).sqrt().max(p + tau.sqrt())
}

struct Row {
    closed: ClosedExample,
    general: LargeNPoint,
    level: f64,
}

fn evaluate(family: Family, solver: &LargeNSolver, grid: &GridSpec, tau: f64) -> Result<Vec<Row>, CliError> {
    (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|i| {
            let z = grid.center(i);
            let ctx = || format!("{} at z = {z}, tau = {tau}", family.name());
            Ok(Row {
                closed: closed_example(family, z, tau).map_err(at(ctx()))?,
                general: solver.point(z, tau).map_err(at(ctx()))?,
                level: solver.level(z, tau).map_err(at(ctx()))?,
            })
        })
        .collect()
}

fn mc_summary(rows: &[Row], field: &FieldGrid, tau: f64) -> Value {
    let mut rel = Vec::new();
    let mut rel_overlap = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.level < -INTERIOR_MARGIN * tau && r.closed.point.rho > 0.0 {
            rel.push((field.rho[i] - r.closed.point.rho) / r.closed.point.rho);
            if r.closed.point.overlap > 0.0 {
                rel_overlap.push((field.overlap[i] - r.closed.point.overlap) / r.closed.point.overlap);
            }
        }
    }
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let mean_abs = |v: &[f64]| mean(&v.iter().map(|x| x.abs()).collect::<Vec<_>>());
    json!({
        "trials_used": field.trials_used,
        "dropped": field.dropped,
        "interior_bins": rel.len(),
        "rho_mean_relative_deviation": mean(&rel),
        "rho_mean_abs_relative_deviation": mean_abs(&rel),
        "overlap_mean_relative_deviation": mean(&rel_overlap),
        "overlap_mean_abs_relative_deviation": mean_abs(&rel_overlap),
    })
}

/// The `Z_a`-form spiric density next to the Gauss-law density and the general
/// solver, on and near the line `Z_a = 0` (`z ⟂ a`).
fn spiric_discrepancy(a: Complex64, solver: &LargeNSolver, tau: f64) -> Result<Value, CliError> {
    let dir = a / a.norm();
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    for s in [0.1, 0.3, 0.5] {
        for delta in [0.0, 1e-3, 1e-2, 1e-1] {
            let z = dir * Complex64::new(delta, s * tau.sqrt());
            let ctx = || format!("spiric discrepancy at z = {z}, tau = {tau}");
            let c = closed_example(Family::Spiric(a), z, tau).map_err(at(ctx()))?;
            if !c.point.inside {
                continue;
            }
            let general = solver.density(z, tau).map_err(at(ctx()))?;
            let za_form = c.rho_za_form.unwrap_or(f64::NAN);
            let rel = (za_form - c.point.rho).abs() / c.point.rho;
            if rel.is_finite() {
                worst = worst.max(rel);
            }
            points.push(json!({
                "z": [z.re, z.im],
                "z_a": 2.0 * (z.conj() * a).re,
                "rho_gauss_law": c.point.rho,
                "rho_za_form": za_form,
                "rho_general": general,
            }));
        }
    }
    Ok(json!({ "tau": tau, "points": points, "max_finite_relative_discrepancy": worst }))
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let Extras::Compare(e) = &cfg.extras else { unreachable!("extras match the command") };
    let mut comparisons = Vec::new();
    let mut discrepancy = Vec::new();
    for &name in &e.families {
        let family = family_of(name, e.a.get(), e.alpha.get());
        let x_solver = large_n_realization(family, e.solver_n).map_err(at(format!("{} realization", family.name())))?;
        let solver = LargeNSolver::new(&x_solver).map_err(at(format!("{} solver", family.name())))?;
        let mc_run = match cfg.n {
            Some(n) => {
                let x0 = build_initial(&family.initial_condition(), n).map_err(at(format!("{} initial condition", family.name())))?;
                let ens = EnsembleConfig::new(n, cfg.tau_list.clone(), cfg.trials, cfg.seed).map_err(at("ensemble config"))?;
                Some(sample_ensemble(&x0, &ens).map_err(at(format!("{} Monte Carlo (seed {})", family.name(), cfg.seed)))?)
            }
            None => None,
        };
        for (k, &tau) in cfg.tau_list.iter().enumerate() {
            let l = extent(family, tau);
            let grid = GridSpec::new(-l, l, -l, l, e.points, e.points).map_err(at("comparison grid"))?;
            let rows = evaluate(family, &solver, &grid, tau)?;
            let field = match &mc_run {
                Some(run) => Some(fields_from_run(run, k, grid).map_err(at(format!("{} fields at tau = {tau}", family.name())))?),
                None => None,
            };
            let mut mismatch = 0usize;
            let mut interior = 0usize;
            let (mut d_rho, mut d_rho_rel, mut d_overlap) = (0.0_f64, 0.0_f64, 0.0_f64);
            for r in &rows {
                if r.closed.point.inside != r.general.inside {
                    mismatch += 1;
                }
                if r.level < -INTERIOR_MARGIN * tau && r.closed.point.inside {
                    interior += 1;
                    let dr = (r.closed.point.rho - r.general.rho).abs();
                    d_rho = d_rho.max(dr);
                    d_rho_rel = d_rho_rel.max(dr / r.closed.point.rho.abs().max(f64::MIN_POSITIVE));
                    d_overlap = d_overlap.max((r.closed.point.overlap - r.general.overlap).abs());
                }
            }
            let header = [
                "x", "y", "inside_closed", "inside_general", "rho_closed", "rho_general", "rho_za_form", "rho_mc", "overlap_closed",
                "overlap_general", "overlap_mc",
            ];
            out.write_csv(
                &format!("compare_{}_tau{k}.csv", family.name()),
                &header,
                rows.iter().enumerate().map(|(i, r)| {
                    let (c, g) = (&r.closed.point, &r.general);
                    [
                        num(c.z.re),
                        num(c.z.im),
                        u8::from(c.inside).to_string(),
                        u8::from(g.inside).to_string(),
                        num(c.rho),
                        num(g.rho),
                        opt(r.closed.rho_za_form.filter(|_| c.inside)),
                        opt(field.as_ref().map(|f| f.rho[i])),
                        num(c.overlap),
                        num(g.overlap),
                        opt(field.as_ref().map(|f| f.overlap[i])),
                    ]
                }),
            )?;
            comparisons.push(json!({
                "family": family.name(),
                "tau": tau,
                "solver_n": e.solver_n,
                "points": rows.len(),
                "interior_points": interior,
                "support_mismatches": mismatch,
                "max_abs_rho_deviation": d_rho,
                "max_rel_rho_deviation": d_rho_rel,
                "max_abs_overlap_deviation": d_overlap,
                "monte_carlo": field.as_ref().map(|f| mc_summary(&rows, f, tau)),
            }));
            if let Family::Spiric(a) = family {
                discrepancy.push(spiric_discrepancy(a, &solver, tau)?);
            }
        }
    }
    out.write_json(
        "compare_summary.json",
        &json!({ "comparisons": comparisons, "spiric_za_form_discrepancy": discrepancy }),
    )
}
