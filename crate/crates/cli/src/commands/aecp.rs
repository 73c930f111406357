//! Exact AECP line scans and diffusion-equation residuals.

use nhdiff_core::aecp::AecpEvaluator;
use nhdiff_core::{Complex64, QuaternionPoint};
use rayon::prelude::*;
use serde_json::json;

use super::{linspace, per_tau};
use crate::config::{ExperimentConfig, Extras, ScanAxis};
use crate::error::{at, CliError};
use crate::output::{num, OutputSet};

pub fn run(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let Extras::Aecp(e) = &cfg.extras else { unreachable!("extras match the command") };
    let x0 = cfg.build_initial(cfg.initial.as_ref().expect("validated"))?;
    let ev = AecpEvaluator::new(&x0).map_err(at("initial condition"))?;
    let reach = 1.5 * cfg.tau_max().sqrt() + x0.norm() / (cfg.n() as f64).sqrt();
    let from = e.from.map(|c| c.get()).unwrap_or_default();
    let to = e.to.map(|c| c.get()).unwrap_or(match e.scan {
        ScanAxis::Z => Complex64::new(reach, 0.0),
        ScanAxis::R => Complex64::new(cfg.tau_max().sqrt(), 0.0),
    });
    let coords: Vec<(Complex64, f64)> = linspace(0.0, 1.0, e.points)
        .into_iter()
        .map(|s| match e.scan {
            ScanAxis::Z => (from + (to - from) * s, e.r),
            ScanAxis::R => (e.z.get(), from.re + (to.re - from.re) * s),
        })
        .collect();
    let residual_idx: Vec<usize> = linspace(0.0, (e.points - 1) as f64, e.residual_points.min(e.points))
        .into_iter()
        .map(|v| v.round() as usize)
        .collect();
    let mut report = Vec::new();
    let mut residual_rows = Vec::new();
    for (k, &tau) in cfg.tau_list.iter().enumerate() {
        let values = coords
            .par_iter()
            .map(|&(z, r)| {
                let ctx = || format!("z = {z}, r = {r}, tau = {tau}");
                let p = QuaternionPoint::new(z, r, tau).map_err(at(ctx()))?;
                ev.log_aecp(p).map(|v| v.log_d).map_err(at(ctx()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.write_csv(
            &per_tau("aecp", k),
            &["x", "y", "r", "log_d"],
            coords.iter().zip(&values).map(|((z, r), v)| [num(z.re), num(z.im), num(*r), num(*v)]),
        )?;
        let mut worst: f64 = 0.0;
        for &i in &residual_idx {
            let (z, r) = coords[i];
            // Points within two steps of r = 0 are moved onto the axis.
            let r = if r <= 2.0 * e.h { 0.0 } else { r };
            let ctx = || format!("residual at z = {z}, r = {r}, tau = {tau}");
            let p = QuaternionPoint::new(z, r, tau).map_err(at(ctx()))?;
            let res = ev.pde_residual(p, e.h, e.h * tau).map_err(at(ctx()))?;
            worst = worst.max(res);
            residual_rows.push([num(tau), num(z.re), num(z.im), num(r), num(res)]);
        }
        report.push(json!({ "tau": tau, "max_relative_residual": worst }));
    }
    out.write_csv("residual.csv", &["tau", "x", "y", "r", "residual"], residual_rows)?;
    out.write_json("residual_report.json", &json!({ "n": cfg.n(), "h_r": e.h, "h_tau_over_tau": e.h, "times": report }))
}
