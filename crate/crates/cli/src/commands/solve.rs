//! Large-`n` grid evaluation and support contours.

use nhdiff_core::largen::{large_n_realization, support_contours, Family, LargeNSolver};
use nhdiff_core::ComplexMatrix;
use rayon::prelude::*;

use super::per_tau;
use crate::config::{ExperimentConfig, Extras, InitialSpec, Realization};
use crate::error::{at, CliError};
use crate::output::{num, OutputSet};

fn solver_matrix(cfg: &ExperimentConfig, realization: Realization) -> Result<ComplexMatrix, CliError> {
    let init = cfg.initial.as_ref().expect("validated");
    match (init, realization) {
        (InitialSpec::Jordan { alpha }, Realization::LargeN) => {
            large_n_realization(Family::Jordan(alpha.get()), cfg.n()).map_err(at("initial condition"))
        }
        _ => cfg.build_initial(init),
    }
}

pub fn run(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let Extras::Solve(extras) = &cfg.extras else { unreachable!("extras match the command") };
    let x0 = solver_matrix(cfg, extras.realization)?;
    let solver = LargeNSolver::new(&x0).map_err(at("initial condition"))?;
    let grid = cfg.grid_spec();
    for (k, &tau) in cfg.tau_list.iter().enumerate() {
        let points = (0..grid.nx * grid.ny)
            .into_par_iter()
            .map(|i| {
                let z = grid.center(i);
                solver.point(z, tau).map_err(at(format!("z = {z}, tau = {tau}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.write_csv(
            &per_tau("solve", k),
            &["x", "y", "inside", "r_star", "phi", "rho", "overlap"],
            points.iter().map(|p| {
                [num(p.z.re), num(p.z.im), u8::from(p.inside).to_string(), num(p.r_star), num(p.phi), num(p.rho), num(p.overlap)]
            }),
        )?;
        if extras.contour {
            let contours = support_contours(&x0, tau, &grid).map_err(at(format!("support contour at tau = {tau}")))?;
            let rows = contours
                .iter()
                .enumerate()
                .flat_map(|(c, pts)| pts.iter().map(move |z| [c.to_string(), num(z.re), num(z.im)]));
            out.write_csv(&per_tau("contour", k), &["contour", "x", "y"], rows)?;
        }
    }
    Ok(())
}
