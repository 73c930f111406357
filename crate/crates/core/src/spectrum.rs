//! The spectral kernel `s(z)`: eigenvalues of `(z - X0)(z - X0)†`, i.e. the
//! squared singular values of `z - X0`. Everything downstream (the AECP
//! initial condition, the support test, the `r*` equation) is a trace
//! functional of this spectrum.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{tridiagonal_self_adjoint_evd, SelfAdjointEvdParams};
use faer::diag::Diag;
use faer::{Mat, Par, Side, Spec};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Squared singular values of `z - X0`, ascending and non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    pub z: Complex64,
    pub values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `(1/n) Σ 1/(s_i + u)`; infinite when some `s_i + u` vanishes.
    pub fn mean_inverse(&self, u: f64) -> f64 {
        let n = self.n() as f64;
        self.values.iter().map(|s| 1.0 / (s + u)).sum::<f64>() / n
    }

    /// `Σ ln(s_i + u)`.
    pub fn log_det_shifted(&self, u: f64) -> f64 {
        self.values.iter().map(|s| (s + u).ln()).sum()
    }
}

/// A point `(z, |w| = r, τ)` of the extended space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuaternionPoint {
    pub z: Complex64,
    pub r: f64,
    pub tau: f64,
}

impl QuaternionPoint {
    pub fn new(z: Complex64, r: f64, tau: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::invalid(format!("radial coordinate must be finite and >= 0, got {r}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("diffusion time must be finite and > 0, got {tau}")));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("z must be finite"));
        }
        Ok(Self { z, r, tau })
    }
}

/// Precomputed structure of `X0` for repeated evaluation of `s(z)`.
///
/// Normal matrices reduce to `|z - λ_i|²`; upper-bidiagonal matrices give a
/// tridiagonal Hermitian product handled in `O(n²)`; anything else goes
/// through a dense Hermitian eigensolve.
#[derive(Debug, Clone)]
pub enum SpectralKernel {
    Normal { eigenvalues: Vec<Complex64> },
    Bidiagonal { diag: Vec<Complex64>, sup: Vec<Complex64> },
    Dense { x0: Mat<Complex64> },
}

const NORMALITY_TOL: f64 = 1e-12;

impl SpectralKernel {
    pub fn new(x0: &ComplexMatrix) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::invalid("X0 has non-finite entries"));
        }
        let n = x0.n();
        let zero = Complex64::new(0.0, 0.0);
        let mut diagonal = true;
        let mut bidiagonal = true;
        for j in 0..n {
            for i in 0..n {
                if i != j && x0.get(i, j) != zero {
                    diagonal = false;
                    if j != i + 1 {
                        bidiagonal = false;
                    }
                }
            }
        }
        if diagonal {
            return Ok(Self::Normal { eigenvalues: (0..n).map(|i| x0.get(i, i)).collect() });
        }
        if bidiagonal {
            return Ok(Self::Bidiagonal {
                diag: (0..n).map(|i| x0.get(i, i)).collect(),
                sup: (0..n - 1).map(|i| x0.get(i, i + 1)).collect(),
            });
        }
        let m = x0.as_mat();
        let comm = (m * m.adjoint() - m.adjoint() * m).norm_l2();
        let scale = x0.norm().powi(2);
        if comm <= NORMALITY_TOL * scale {
            let eigenvalues = m
                .eigenvalues()
                .map_err(|e| Error::Numerical(format!("eigenvalues of normal X0: {e:?}")))?;
            return Ok(Self::Normal { eigenvalues });
        }
        Ok(Self::Dense { x0: m.clone() })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Normal { eigenvalues } => eigenvalues.len(),
            Self::Bidiagonal { diag, .. } => diag.len(),
            Self::Dense { x0 } => x0.nrows(),
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Self::Normal { .. })
    }

    pub fn spectrum(&self, z: Complex64) -> Result<SingularSpectrum> {
        let raw = match self {
            Self::Normal { eigenvalues } => eigenvalues.iter().map(|l| (z - l).norm_sqr()).collect(),
            Self::Bidiagonal { diag, sup } => bidiagonal_gram_eigenvalues(diag, sup, z)?,
            Self::Dense { x0 } => {
                let n = x0.nrows();
                let a = Mat::from_fn(n, n, |i, j| if i == j { z } else { Complex64::new(0.0, 0.0) }) - x0;
                let gram = &a * a.adjoint();
                gram.self_adjoint_eigenvalues(Side::Lower)
                    .map_err(|e| Error::Numerical(format!("Hermitian eigensolver at z = {z}: {e:?}")))?
            }
        };
        finish_spectrum(z, raw)
    }
}

fn finish_spectrum(z: Complex64, mut values: Vec<f64>) -> Result<SingularSpectrum> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite squared singular value at z = {z}")));
    }
    values.sort_by(f64::total_cmp);
    let max = values.last().copied().unwrap_or(0.0).max(0.0);
    let tol = 1e-12 * max;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -tol {
                return Err(Error::Numerical(format!(
                    "Gram matrix eigenvalue {v:e} below round-off floor {:e} at z = {z}",
                    -tol
                )));
            }
            *v = 0.0;
        }
    }
    Ok(SingularSpectrum { z, values })
}

/// `B B†` for upper bidiagonal `B = z - X0` is Hermitian tridiagonal; its
/// off-diagonal phases can be gauged away, leaving a real symmetric problem.
fn bidiagonal_gram_eigenvalues(diag: &[Complex64], sup: &[Complex64], z: Complex64) -> Result<Vec<f64>> {
    let n = diag.len();
    let b: Vec<Complex64> = diag.iter().map(|d| z - d).collect();
    let mut main = Diag::<f64>::zeros(n);
    let mut off = Diag::<f64>::zeros(n);
    for i in 0..n {
        let e = if i + 1 < n { sup[i].norm_sqr() } else { 0.0 };
        main[i] = b[i].norm_sqr() + e;
        if i + 1 < n {
            // (B B†)_{i,i+1} = -sup_i · conj(b_{i+1})
            off[i] = (sup[i] * b[i + 1].conj()).norm();
        }
    }
    let mut s = Diag::<f64>::zeros(n);
    let req = faer::linalg::temp_mat_scratch::<f64>(n, 1)
        .and(faer::linalg::temp_mat_scratch::<f64>(n, 1));
    let mut buf = MemBuffer::new(req);
    tridiagonal_self_adjoint_evd(
        main.as_ref(),
        off.as_ref(),
        s.as_mut(),
        None,
        Par::Seq,
        MemStack::new(&mut buf),
        Spec::<SelfAdjointEvdParams, f64>::default(),
    )
    .map_err(|e| Error::Numerical(format!("tridiagonal eigensolver at z = {z}: {e:?}")))?;
    Ok((0..n).map(|i| s[i]).collect())
}

/// Squared singular values of `z - X0`.
pub fn singular_spectrum(x0: &ComplexMatrix, z: Complex64) -> Result<SingularSpectrum> {
    SpectralKernel::new(x0)?.spectrum(z)
}

/// `φ0(z, r) = (1/n) Σ ln(s_i + r²)`. Returns `-inf` at an exact eigenvalue
/// of `X0` with `r = 0`.
pub fn phi0(spec: &SingularSpectrum, r: f64) -> f64 {
    spec.log_det_shifted(r * r) / spec.n() as f64
}
