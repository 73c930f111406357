//! Large-`n` limit: the Hopf–Lax solution of the inviscid AECP evolution,
//! support classification, density and overlap fields for arbitrary `X0`,
//! closed forms for the three model families, Burgers characteristics and
//! support / pseudospectrum contours.

mod characteristics;
mod closed;
mod contour;

pub use characteristics::{characteristics_field, characteristics_from_spectrum, CharacteristicLine, CharacteristicsField, Nu0};
pub use closed::{closed_example, closed_green, large_n_realization, ClosedExample, Family};
pub use contour::{marching_squares, pseudospectrum_boundary, support_contours, Contour};

use std::f64::consts::PI;

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spectrum::{SingularSpectrum, SpectralKernel};

/// Relative slack under which a point on the support boundary counts as
/// inside.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeNPoint {
    pub z: Complex64,
    pub tau: f64,
    pub inside: bool,
    pub r_star: f64,
    pub phi: f64,
    pub rho: f64,
    pub overlap: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be finite and > 0, got {tau}")));
    }
    Ok(())
}

/// Inside the support iff `(1/n) Σ 1/s_i >= 1/τ`; an exact eigenvalue of
/// `X0` is always inside.
pub fn classify_support(spec: &SingularSpectrum, tau: f64) -> bool {
    if spec.values.contains(&0.0) {
        return true;
    }
    spec.mean_inverse(0.0) * tau >= 1.0 - BOUNDARY_SLACK
}

/// `H(z) = 1/((1/n) Σ 1/s_i) - τ`, negative inside the support. Smooth away
/// from eigenvalues of `X0`, so it serves as the contouring function.
pub fn support_level(spec: &SingularSpectrum, tau: f64) -> f64 {
    if spec.values.contains(&0.0) {
        return -tau;
    }
    1.0 / spec.mean_inverse(0.0) - tau
}

/// `u = r*²` solving `(1/n) Σ 1/(s_i + u) = 1/τ`, by bisection on `[0, τ]`.
fn solve_u(spec: &SingularSpectrum, tau: f64) -> f64 {
    if !classify_support(spec, tau) {
        return 0.0;
    }
    let target = 1.0 / tau;
    let (mut lo, mut hi) = (0.0_f64, tau);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spec.mean_inverse(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

pub fn solve_rstar(spec: &SingularSpectrum, tau: f64) -> f64 {
    solve_u(spec, tau).sqrt()
}

/// `φ(z, 0, τ) = (1/n) Σ ln(s_i + r*²) - r*²/τ`.
pub fn hopf_lax_potential(spec: &SingularSpectrum, tau: f64) -> f64 {
    let u = solve_u(spec, tau);
    spec.log_det_shifted(u) / spec.n() as f64 - u / tau
}

/// `O = r*²/(πτ²)`.
pub fn overlap_general(spec: &SingularSpectrum, tau: f64) -> f64 {
    solve_u(spec, tau) / (PI * tau * tau)
}

/// Large-`n` evaluator bound to one initial matrix.
#[derive(Debug, Clone)]
pub struct LargeNSolver {
    x0: Mat<Complex64>,
    kernel: SpectralKernel,
}

impl LargeNSolver {
    pub fn new(x0: &ComplexMatrix) -> Result<Self> {
        Ok(Self { x0: x0.as_mat().clone(), kernel: SpectralKernel::new(x0)? })
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn spectrum(&self, z: Complex64) -> Result<SingularSpectrum> {
        self.kernel.spectrum(z)
    }

    pub fn inside(&self, z: Complex64, tau: f64) -> Result<bool> {
        check_tau(tau)?;
        Ok(classify_support(&self.spectrum(z)?, tau))
    }

    pub fn level(&self, z: Complex64, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(support_level(&self.spectrum(z)?, tau))
    }

    pub fn phi(&self, z: Complex64, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(hopf_lax_potential(&self.spectrum(z)?, tau))
    }

    pub fn point(&self, z: Complex64, tau: f64) -> Result<LargeNPoint> {
        check_tau(tau)?;
        let spec = self.spectrum(z)?;
        let inside = classify_support(&spec, tau);
        let u = solve_u(&spec, tau);
        let phi = spec.log_det_shifted(u) / spec.n() as f64 - u / tau;
        let rho = if inside { self.density_inside(z, u)? } else { 0.0 };
        Ok(LargeNPoint { z, tau, inside, r_star: u.sqrt(), phi, rho, overlap: u / (PI * tau * tau) })
    }

    pub fn density(&self, z: Complex64, tau: f64) -> Result<f64> {
        self.point(z, tau).map(|p| p.rho)
    }

    /// Density inside the support at `u = r*²`:
    ///
    /// ```text
    /// ρ = (1/nπ) { [Tr(A†𝓜⁻²) Tr(A𝓜⁻²) + r*² (Tr 𝓜⁻²)²] / Tr 𝓜⁻²
    ///              + Tr(𝓜⁻¹ [𝓜⁻¹, A] A†) },   A = z - X0,  𝓜 = AA† + r*².
    /// ```
    fn density_inside(&self, z: Complex64, u: f64) -> Result<f64> {
        let nf = self.n() as f64;
        let (num, t2, comm) = match &self.kernel {
            SpectralKernel::Normal { eigenvalues } => {
                let (mut c, mut t2) = (Complex64::new(0.0, 0.0), 0.0);
                for l in eigenvalues {
                    let a = z - l;
                    let m = a.norm_sqr() + u;
                    if m == 0.0 {
                        return Err(Error::Numerical(format!("singular 𝓜 at z = {z}")));
                    }
                    c += a / (m * m);
                    t2 += 1.0 / (m * m);
                }
                (c.norm_sqr(), t2, 0.0)
            }
            _ => self.dense_traces(z, u)?,
        };
        let rho = ((num + u * t2 * t2) / t2 + comm) / (nf * PI);
        Ok(rho.max(0.0))
    }

    fn dense_traces(&self, z: Complex64, u: f64) -> Result<(f64, f64, f64)> {
        let n = self.n();
        let a = Mat::from_fn(n, n, |i, j| if i == j { z } else { Complex64::new(0.0, 0.0) }) - &self.x0;
        let mut m = &a * a.adjoint();
        for i in 0..n {
            m[(i, i)] += u;
        }
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("Hermitian eigensolver at z = {z}: {e:?}")))?;
        let (v, s) = (evd.U(), evd.S());
        let eig: Vec<f64> = (0..n).map(|k| s[k].re).collect();
        if eig.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Numerical(format!("𝓜 not positive definite at z = {z}")));
        }
        let scaled = |p: i32| {
            let mut w = v.to_owned();
            for (k, e) in eig.iter().enumerate() {
                let f = e.powi(-p);
                w.col_mut(k).iter_mut().for_each(|x| *x *= f);
            }
            &w * v.adjoint()
        };
        let (m1, m2) = (scaled(1), scaled(2));
        let trace_prod = |x: &Mat<Complex64>, y: &Mat<Complex64>| -> Complex64 {
            let mut t = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    t += x[(i, j)] * y[(j, i)];
                }
            }
            t
        };
        let t2: f64 = eig.iter().map(|e| e.powi(-2)).sum();
        let c_a = trace_prod(&m2, &a);
        let adj = a.adjoint().to_owned();
        let c_adj = trace_prod(&m2, &adj);
        // Tr(𝓜⁻¹[𝓜⁻¹, A]A†) = Tr(𝓜⁻²AA†) - Tr(𝓜⁻¹A𝓜⁻¹A†)
        let m1a = &m1 * &a;
        let m1adj = &m1 * &adj;
        let comm = trace_prod(&m2, &(&a * &adj)) - trace_prod(&m1a, &m1adj);
        Ok(((c_adj * c_a).re, t2, comm.re))
    }

    /// `(1/4π)(∂xx + ∂yy)φ` by a five-point stencil of spacing `h`.
    pub fn density_fd(&self, z: Complex64, tau: f64, h: f64) -> Result<f64> {
        check_tau(tau)?;
        if !(h > 0.0) {
            return Err(Error::StepSize("stencil spacing must be > 0".into()));
        }
        let offsets = [(0.0, 0.0), (h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)];
        let mut v = [0.0; 5];
        for (k, (dx, dy)) in offsets.iter().enumerate() {
            let p = z + Complex64::new(*dx, *dy);
            let spec = self.spectrum(p)?;
            if !classify_support(&spec, tau) {
                return Err(Error::InvalidStencil(format!("stencil point {p} lies outside the support")));
            }
            v[k] = hopf_lax_potential(&spec, tau);
        }
        Ok((v[1] + v[2] + v[3] + v[4] - 4.0 * v[0]) / (h * h) / (4.0 * PI))
    }
}

pub fn density_general(x0: &ComplexMatrix, z: Complex64, tau: f64) -> Result<f64> {
    LargeNSolver::new(x0)?.density(z, tau)
}

pub fn density_fd_oracle(x0: &ComplexMatrix, z: Complex64, tau: f64, h: f64) -> Result<f64> {
    LargeNSolver::new(x0)?.density_fd(z, tau, h)
}

/// `∫ f dA` over the box, midpoint rule on `cells × cells`, with cells cut by
/// the support boundary (corners disagree on `inside`) refined 16×16.
pub fn integrate_over_support(
    f: impl Fn(Complex64) -> Result<f64>,
    inside: impl Fn(Complex64) -> Result<bool>,
    (x_min, x_max, y_min, y_max): (f64, f64, f64, f64),
    cells: usize,
) -> Result<f64> {
    const REFINE: usize = 16;
    let (dx, dy) = ((x_max - x_min) / cells as f64, (y_max - y_min) / cells as f64);
    let corner = |i: usize, j: usize| inside(Complex64::new(x_min + i as f64 * dx, y_min + j as f64 * dy));
    let mut corners = vec![false; (cells + 1) * (cells + 1)];
    for i in 0..=cells {
        for j in 0..=cells {
            corners[i * (cells + 1) + j] = corner(i, j)?;
        }
    }
    let mut total = 0.0;
    for i in 0..cells {
        for j in 0..cells {
            let cs = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)].map(|(a, b)| corners[a * (cells + 1) + b]);
            let (x0, y0) = (x_min + i as f64 * dx, y_min + j as f64 * dy);
            if cs.iter().all(|c| *c == cs[0]) {
                let c = Complex64::new(x0 + 0.5 * dx, y0 + 0.5 * dy);
                if inside(c)? {
                    total += f(c)? * dx * dy;
                }
            } else {
                let (hx, hy) = (dx / REFINE as f64, dy / REFINE as f64);
                for a in 0..REFINE {
                    for b in 0..REFINE {
                        let c = Complex64::new(x0 + (a as f64 + 0.5) * hx, y0 + (b as f64 + 0.5) * hy);
                        if inside(c)? {
                            total += f(c)? * hx * hy;
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_initial, InitialCondition};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec_of(values: Vec<f64>) -> SingularSpectrum {
        SingularSpectrum { z: c(0.0, 0.0), values }
    }

    #[test]
    fn ginibre_solver_values() {
        let tau = 1.3;
        let s = spec_of(vec![0.49; 8]);
        assert!(classify_support(&s, tau));
        assert!((solve_rstar(&s, tau) - (tau - 0.49f64).sqrt()).abs() < 1e-13);
        let phi = hopf_lax_potential(&s, tau);
        assert!((phi - (tau.ln() + 0.49 / tau - 1.0)).abs() < 1e-13);
        assert!((overlap_general(&s, tau) - (tau - 0.49) / (PI * tau * tau)).abs() < 1e-14);
        let out = spec_of(vec![2.0; 8]);
        assert!(!classify_support(&out, tau));
        assert_eq!(solve_rstar(&out, tau), 0.0);
        assert!((hopf_lax_potential(&out, tau) - 2f64.ln()).abs() < 1e-15);
        // boundary counts as inside with r* = 0
        let edge = spec_of(vec![tau; 4]);
        assert!(classify_support(&edge, tau));
        assert!(solve_rstar(&edge, tau) < 1e-6);
        assert!(classify_support(&spec_of(vec![0.0, 5.0]), 0.1));
    }

    #[test]
    fn ginibre_density_both_paths() {
        let x = ComplexMatrix::zeros(6);
        let s = LargeNSolver::new(&x).unwrap();
        assert!((s.density(c(0.3, 0.2), 1.0).unwrap() - 1.0 / PI).abs() < 1e-13);
        assert_eq!(s.density(c(1.3, 0.2), 1.0).unwrap(), 0.0);
        assert!((s.density_fd(c(0.4, 0.0), 1.0, 1e-3).unwrap() - 1.0 / PI).abs() < 1e-5);
        assert!(matches!(s.density_fd(c(0.9999, 0.0), 1.0, 1e-3), Err(Error::InvalidStencil(_))));
    }

    #[test]
    fn dense_path_matches_normal_path() {
        // a normal matrix hidden behind a unitary rotation, forced down the dense path
        let d = build_initial(&InitialCondition::Spiric(c(0.7, 0.2)), 6).unwrap();
        let normal = LargeNSolver::new(&d).unwrap();
        let dense = LargeNSolver { x0: d.as_mat().clone(), kernel: SpectralKernel::Dense { x0: d.as_mat().clone() } };
        for z in [c(0.1, 0.3), c(0.0, 0.0), c(-0.5, 0.1)] {
            let (a, b) = (normal.density(z, 1.0).unwrap(), dense.density(z, 1.0).unwrap());
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn support_integrates_to_one() {
        let x = ComplexMatrix::zeros(4);
        let s = LargeNSolver::new(&x).unwrap();
        let total = integrate_over_support(|z| s.density(z, 1.0), |z| s.inside(z, 1.0), (-1.2, 1.2, -1.2, 1.2), 120).unwrap();
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rstar_monotone_in_tau(vals in proptest::collection::vec(0.0f64..4.0, 1..10), t1 in 0.01f64..5.0, dt in 0.0f64..5.0) {
            let s = spec_of(vals);
            prop_assert!(solve_rstar(&s, t1 + dt) >= solve_rstar(&s, t1) - 1e-9);
        }

        #[test]
        fn rstar_solves_equation(vals in proptest::collection::vec(0.01f64..4.0, 1..10), tau in 0.01f64..5.0) {
            let s = spec_of(vals);
            let u = solve_rstar(&s, tau).powi(2);
            if classify_support(&s, tau) && u > 1e-10 {
                prop_assert!((s.mean_inverse(u) * tau - 1.0).abs() < 1e-10);
            } else {
                prop_assert!(u < 1e-10);
            }
        }
    }
}
