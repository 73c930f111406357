//! Scaling profiles against the exact finite-`n` quadrature.

use nhdiff_core::asymptotics::{
    ginibre_edge_exact_ratio, ginibre_edge_profile, jordan_origin_symmetric, jordan_shape_test, spiric_collision_leading_log,
    spiric_shape_test, ShapeTest,
};
use nhdiff_core::Complex64;
use serde_json::{json, Value};

use super::linspace;
use crate::config::{ExperimentConfig, Extras, ProfileName};
use crate::error::{at, CliError};
use crate::output::{num, OutputSet};

pub const EDGE_WINDOW: (f64, f64) = (-2.0, 2.0);
pub const COLLISION_WINDOW: (f64, f64) = (0.5, 2.0);
pub const ORIGIN_WINDOW: (f64, f64) = (0.5, 3.0);

pub const EDGE_TOLERANCE: f64 = 0.03;
pub const COLLISION_TOLERANCE: f64 = 0.05;
pub const ORIGIN_TOLERANCE: f64 = 0.10;

fn name(p: ProfileName) -> &'static str {
    match p {
        ProfileName::GinibreEdge => "ginibre_edge",
        ProfileName::SpiricCollision => "spiric_collision",
        ProfileName::JordanOrigin => "jordan_origin",
    }
}

fn write_pair(out: &mut OutputSet, stem: &str, coords: &[f64], exact: &[f64], profile: &[f64]) -> Result<(), CliError> {
    let header = ["coord", "log_value"];
    let rows = |v: &[f64]| coords.iter().zip(v).map(|(c, y)| [num(*c), num(*y)]).collect::<Vec<_>>();
    out.write_csv(&format!("{stem}_exact.csv"), &header, rows(exact))?;
    out.write_csv(&format!("{stem}_profile.csv"), &header, rows(profile))
}

fn shape_json(t: &ShapeTest) -> Value {
    json!({ "log_constant": t.log_constant, "max_relative_deviation": t.max_rel_deviation })
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let Extras::Asympt(e) = &cfg.extras else { unreachable!("extras match the command") };
    let n = cfg.n();
    let mut report = Vec::new();
    for &family in &e.families {
        let stem = name(family);
        let entry = match family {
            ProfileName::GinibreEdge => {
                let etas = linspace(EDGE_WINDOW.0, EDGE_WINDOW.1, e.points);
                let exact = ginibre_edge_exact_ratio(n, &etas, e.tau).map_err(at(format!("edge quadrature, tau = {}", e.tau)))?;
                let base = ginibre_edge_profile(0.0, e.tau);
                let profile: Vec<f64> = etas.iter().map(|&x| ginibre_edge_profile(x, e.tau) / base).collect();
                let dev = exact.iter().zip(&profile).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
                write_pair(out, stem, &etas, &ln(&exact), &ln(&profile))?;
                json!({
                    "family": stem,
                    "parameter": { "tau": e.tau },
                    "window": EDGE_WINDOW,
                    "measure": "max absolute deviation of the weighted ratio from erfc(sqrt(2/tau) eta)",
                    "max_deviation": dev,
                    "tolerance": EDGE_TOLERANCE,
                    "passes": dev < EDGE_TOLERANCE,
                })
            }
            ProfileName::SpiricCollision => {
                let etas = linspace(COLLISION_WINDOW.0, COLLISION_WINDOW.1, e.points);
                let t = e.t_spiric;
                let test = spiric_shape_test(n, &etas, t).map_err(at(format!("collision quadrature, t = {t}")))?;
                let leading: Vec<f64> = etas.iter().map(|&x| spiric_collision_leading_log(Complex64::new(x, 0.0), t, n)).collect();
                let alt = ShapeTest::fit(etas.clone(), test.log_exact.clone(), leading).map_err(at("collision leading-order fit"))?;
                let fitted: Vec<f64> = test.log_profile.iter().map(|v| v + test.log_constant).collect();
                write_pair(out, stem, &etas, &test.log_exact, &fitted)?;
                json!({
                    "family": stem,
                    "parameter": { "t": t },
                    "window": COLLISION_WINDOW,
                    "measure": "max relative deviation after one fitted constant",
                    "max_deviation": test.max_rel_deviation,
                    "log_constant": test.log_constant,
                    "tolerance": COLLISION_TOLERANCE,
                    "passes": test.passes(COLLISION_TOLERANCE),
                    "leading_order_saddle": shape_json(&alt),
                })
            }
            ProfileName::JordanOrigin => {
                let xs = linspace(ORIGIN_WINDOW.0, ORIGIN_WINDOW.1, e.points);
                let t = e.t_jordan;
                let test = jordan_shape_test(n, &xs, t).map_err(at(format!("origin quadrature, t = {t}")))?;
                let sym = xs
                    .iter()
                    .map(|&x| jordan_origin_symmetric(x, t).map(f64::ln).map_err(at(format!("x = {x}, t = {t}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let alt = ShapeTest::fit(xs.clone(), test.log_exact.clone(), sym).map_err(at("origin symmetric fit"))?;
                let fitted: Vec<f64> = test.log_profile.iter().map(|v| v + test.log_constant).collect();
                write_pair(out, stem, &xs, &test.log_exact, &fitted)?;
                json!({
                    "family": stem,
                    "parameter": { "t": t },
                    "window": ORIGIN_WINDOW,
                    "measure": "max relative deviation after one fitted constant",
                    "max_deviation": test.max_rel_deviation,
                    "log_constant": test.log_constant,
                    "tolerance": ORIGIN_TOLERANCE,
                    "passes": test.passes(ORIGIN_TOLERANCE),
                    "two_saddle_form": shape_json(&alt),
                })
            }
        };
        report.push(entry);
    }
    out.write_json("shape_report.json", &json!({ "n": n, "profiles": report }))
}
