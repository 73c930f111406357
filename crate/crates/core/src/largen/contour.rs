//! Support boundaries and Frobenius pseudospectra as level sets, traced by
//! marching squares.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::support_level;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::observables::GridSpec;
use crate::spectrum::SpectralKernel;

/// A traced polyline; closed curves repeat their first point at the end.
pub type Contour = Vec<Complex64>;

/// Edge of the vertex lattice: `(i, j, horizontal)`.
type EdgeKey = (usize, usize, bool);

/// Zero level set of `values`, sampled on the `(nx+1) × (ny+1)` corner
/// lattice of `grid` (index `i·(ny+1) + j`), with negative values inside.
pub fn marching_squares(grid: &GridSpec, values: &[f64]) -> Result<Vec<Contour>> {
    let (nx, ny) = (grid.nx, grid.ny);
    if values.len() != (nx + 1) * (ny + 1) {
        return Err(Error::invalid("level values do not match the grid lattice"));
    }
    let at = |i: usize, j: usize| values[i * (ny + 1) + j];
    let vertex = |i: usize, j: usize| {
        Complex64::new(grid.x_min + i as f64 * grid.dx(), grid.y_min + j as f64 * grid.dy())
    };
    let crossing = |key: EdgeKey| -> Complex64 {
        let (i, j, horizontal) = key;
        let (i2, j2) = if horizontal { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (at(i, j), at(i2, j2));
        let t = if a == b { 0.5 } else { (a / (a - b)).clamp(0.0, 1.0) };
        vertex(i, j) + (vertex(i2, j2) - vertex(i, j)) * t
    };
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let inside = v.map(|x| x <= 0.0);
            let case = inside.iter().enumerate().fold(0, |acc, (k, b)| acc | ((*b as u8) << k));
            // edges: bottom, right, top, left
            let e = [(i, j, true), (i + 1, j, false), (i, j + 1, true), (i, j, false)];
            let mut push = |a: usize, b: usize| segments.push((e[a], e[b]));
            match case {
                0 | 15 => {}
                1 | 14 => push(3, 0),
                2 | 13 => push(0, 1),
                3 | 12 => push(3, 1),
                4 | 11 => push(1, 2),
                6 | 9 => push(0, 2),
                7 | 8 => push(2, 3),
                5 | 10 => {
                    let center_inside = v.iter().sum::<f64>() <= 0.0;
                    if (case == 5) == center_inside {
                        push(3, 2);
                        push(0, 1);
                    } else {
                        push(3, 0);
                        push(1, 2);
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    Ok(chain(&segments).into_iter().map(|keys| keys.into_iter().map(crossing).collect()).collect())
}

fn chain(segments: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<EdgeKey>> {
    let mut by_edge: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let next_from = |edge: EdgeKey, used: &[bool]| by_edge[&edge].iter().copied().find(|s| !used[*s]);
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut forward = vec![a, b];
        let mut tail = b;
        while let Some(s) = next_from(tail, &used) {
            used[s] = true;
            let (p, q) = segments[s];
            tail = if p == tail { q } else { p };
            forward.push(tail);
        }
        if tail != a {
            let mut head = a;
            let mut backward = Vec::new();
            while let Some(s) = next_from(head, &used) {
                used[s] = true;
                let (p, q) = segments[s];
                head = if p == head { q } else { p };
                backward.push(head);
            }
            backward.reverse();
            backward.extend(forward);
            forward = backward;
        }
        out.push(forward);
    }
    out
}

/// Level function `H(z) = 1/((1/n) Σ 1/s_i) - τ` on the corner lattice.
pub fn support_level_grid(x0: &ComplexMatrix, tau: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    grid.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be finite and > 0, got {tau}")));
    }
    let kernel = SpectralKernel::new(x0)?;
    let (dx, dy) = (grid.dx(), grid.dy());
    (0..(grid.nx + 1) * (grid.ny + 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / (grid.ny + 1), k % (grid.ny + 1));
            let z = Complex64::new(grid.x_min + i as f64 * dx, grid.y_min + j as f64 * dy);
            Ok(support_level(&kernel.spectrum(z)?, tau))
        })
        .collect()
}

/// Boundary of the large-`n` support of `X(τ)`.
pub fn support_contours(x0: &ComplexMatrix, tau: f64, grid: &GridSpec) -> Result<Vec<Contour>> {
    marching_squares(grid, &support_level_grid(x0, tau, grid)?)
}

/// Boundary of the Frobenius-norm `ε`-pseudospectrum `‖(z - X0)⁻¹‖_F > 1/ε`,
/// which is the support boundary at `τ = nε²`.
pub fn pseudospectrum_boundary(x0: &ComplexMatrix, epsilon: f64, grid: &GridSpec) -> Result<Vec<Contour>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be finite and > 0, got {epsilon}")));
    }
    support_contours(x0, x0.n() as f64 * epsilon * epsilon, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_is_one_closed_contour() {
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 80, 80).unwrap();
        let cs = support_contours(&ComplexMatrix::zeros(3), 1.0, &grid).unwrap();
        assert_eq!(cs.len(), 1);
        let cont = &cs[0];
        assert_eq!(cont.first(), cont.last());
        let cell = grid.dx();
        assert!(cont.iter().all(|p| (p.norm() - 1.0).abs() < cell));
    }

    #[test]
    fn empty_and_two_island_cases() {
        let grid = GridSpec::new(-2.0, 2.0, -2.0, 2.0, 60, 60).unwrap();
        let far = GridSpec::new(5.0, 6.0, 5.0, 6.0, 10, 10).unwrap();
        assert!(support_contours(&ComplexMatrix::zeros(2), 1.0, &far).unwrap().is_empty());
        let x = crate::matrix::build_initial(&crate::matrix::InitialCondition::Spiric(c(1.0, 0.0)), 4).unwrap();
        assert_eq!(support_contours(&x, 0.3, &grid).unwrap().len(), 2);
        assert_eq!(support_contours(&x, 1.5, &grid).unwrap().len(), 1);
    }

    #[test]
    fn pseudospectrum_radius() {
        let grid = GridSpec::new(-1.0, 1.0, -1.0, 1.0, 100, 100).unwrap();
        let cs = pseudospectrum_boundary(&ComplexMatrix::zeros(4), 0.2, &grid).unwrap();
        assert!(cs.iter().flatten().all(|p| (p.norm() - 0.4).abs() < grid.dx()));
    }

    #[test]
    fn open_contour_at_box_edge() {
        let grid = GridSpec::new(0.0, 2.0, -2.0, 2.0, 40, 80).unwrap();
        let cs = support_contours(&ComplexMatrix::zeros(2), 1.0, &grid).unwrap();
        assert_eq!(cs.len(), 1);
        assert_ne!(cs[0].first(), cs[0].last());
    }
}
