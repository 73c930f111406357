//! Normalization and reproducing-property report for the Ginibre kernel.

use std::f64::consts::PI;

use nhdiff_core::aecp::{kernel_convolution, kernel_k, kernel_trace_integral};
use nhdiff_core::Complex64;
use serde_json::json;

use super::{linspace, per_tau};
use crate::config::{ExperimentConfig, Extras};
use crate::error::{at, CliError};
use crate::output::{num, OutputSet};

pub fn run(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let Extras::Kernel(e) = &cfg.extras else { unreachable!("extras match the command") };
    let n = cfg.n();
    let nf = n as f64;
    let mut report = Vec::new();
    for (k, &tau) in cfg.tau_list.iter().enumerate() {
        let trace = kernel_trace_integral(n, tau).map_err(at(format!("trace at tau = {tau}")))?;
        let mut pairs = Vec::new();
        let mut worst: f64 = 0.0;
        for [z, u] in &e.pairs {
            let (z, u) = (z.get(), u.get());
            let ctx = || format!("z = {z}, u = {u}, tau = {tau}");
            let conv = kernel_convolution(n, z, u, tau).map_err(at(ctx()))?;
            let target = kernel_k(n, z, u, tau).map_err(at(ctx()))?.value() / nf;
            let rel = (conv - target).norm() / target.norm();
            worst = worst.max(rel);
            pairs.push(json!({
                "z": [z.re, z.im],
                "u": [u.re, u.im],
                "convolution": [conv.re, conv.im],
                "k_over_n": [target.re, target.im],
                "relative_error": rel,
            }));
        }
        let xs = linspace(0.0, 1.5 * tau.sqrt(), e.diagonal_points);
        let diag = xs
            .iter()
            .map(|&x| {
                let z = Complex64::new(x, 0.0);
                kernel_k(n, z, z, tau).map(|v| v.value().re).map_err(at(format!("z = {z}, tau = {tau}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        // Bulk: |z| <= √τ/2, where K(z, z) ≈ 1/(πτ) once n is large.
        let bulk = xs
            .iter()
            .zip(&diag)
            .filter(|(x, _)| **x <= 0.5 * tau.sqrt())
            .map(|(_, v)| (v * PI * tau - 1.0).abs())
            .fold(0.0, f64::max);
        out.write_csv(&per_tau("kernel_diagonal", k), &["x", "k"], xs.iter().zip(&diag).map(|(x, v)| [num(*x), num(*v)]))?;
        report.push(json!({
            "tau": tau,
            "trace_integral": trace,
            "trace_error": (trace - 1.0).abs(),
            "reproducing": pairs,
            "reproducing_max_relative_error": worst,
            "bulk_max_relative_deviation": bulk,
        }));
    }
    out.write_json("kernel_report.json", &json!({ "n": n, "times": report }))
}
