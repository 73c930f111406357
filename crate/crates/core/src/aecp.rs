//! Exact finite-`n` averaged extended characteristic polynomial
//! `D(z, r, τ) = ⟨det((z - X)(z - X)† + r²)⟩`.
//!
//! `D` solves a radial heat equation in `r` with initial data
//! `D0(z, r) = Π(s_i + r²)`, so it is the heat-kernel integral
//!
//! ```text
//! D(z,r,τ) = (2n/τ) ∫₀^∞ r' exp(-n(r² + r'²)/τ) I₀(2n r r'/τ) D0(z,r') dr'
//! ```
//!
//! evaluated here entirely in the log domain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::mc::sample_evolved;
use crate::special::{ln_factorial, ln_i0, ln_laguerre_nonpositive, log_sum_exp, GaussLegendre};
use crate::spectrum::{QuaternionPoint, SingularSpectrum, SpectralKernel};

/// How far (in nats) below its peak the log-integrand must fall at both ends
/// of the integration window.
const WINDOW_DROP: f64 = 45.0;

/// A discretized radial integral: `∫ f ≈ Σ exp(log_weights_k) f(nodes_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialQuadrature {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// Peak of the log-integrand.
    pub center: f64,
    /// Half-width of the window on the wider side.
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAecpValue {
    pub log_d: f64,
    pub n: usize,
    pub point: QuaternionPoint,
}

/// `ln D0(z, r) = Σ ln(s_i + r²)` (this is `n·φ0`).
pub fn log_d0(x0: &ComplexMatrix, z: Complex64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("r must be >= 0, got {r}")));
    }
    let spec = SpectralKernel::new(x0)?.spectrum(z)?;
    Ok(spec.log_det_shifted(r * r))
}

struct Integrand<'a> {
    spec: &'a SingularSpectrum,
    n: f64,
    r: f64,
    tau: f64,
}

impl Integrand<'_> {
    fn log_value(&self, rp: f64) -> f64 {
        let Self { spec, n, r, tau } = *self;
        if rp <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (2.0 * n / tau).ln() + rp.ln() - n * (r * r + rp * rp) / tau
            + ln_i0(2.0 * n * r * rp / tau)
            + spec.log_det_shifted(rp * rp)
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let tol = 1e-12 * b.abs().max(1e-300);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

impl RadialQuadrature {
    /// Window for the heat-kernel integral at `(z, r, τ)`.
    ///
    /// The log-integrand is unimodal in `r'` (it is concave in `r'²` up to
    /// the Jacobian), with its maximum inside `[0, 2(r + √τ + max √s_i)]`.
    /// The window starts at `±12√(τ/2n)` around the peak and is widened
    /// until the integrand has fallen by 45 nats on both sides, which also
    /// covers the broad `n^{-1/4}` peaks at spectral edges.
    fn build(f: &Integrand<'_>) -> Result<Self> {
        let smax = f.spec.values.last().copied().unwrap_or(0.0).sqrt();
        let hi = 2.0 * (f.r + f.tau.sqrt() + smax);
        let (m, fmax) = golden_max(|x| f.log_value(x), 0.0, hi);
        if !fmax.is_finite() || m >= hi * (1.0 - 1e-9) {
            return Err(Error::QuadratureSetup(format!(
                "integrand maximum not bracketed in [0, {hi}] (found {m}, value {fmax})"
            )));
        }
        let sigma = (f.tau / (2.0 * f.n)).sqrt();
        let mut left = 12.0 * sigma;
        while m - left > 0.0 && f.log_value(m - left) > fmax - WINDOW_DROP {
            left *= 1.5;
        }
        let mut right = 12.0 * sigma;
        while f.log_value(m + right) > fmax - WINDOW_DROP {
            right *= 1.5;
            if right > 1e6 * hi {
                return Err(Error::QuadratureSetup("integrand does not decay".into()));
            }
        }
        let a = (m - left).max(0.0);
        let b = m + right;
        let (nodes, log_weights) = GaussLegendre::standard().mapped(a, b).map(|(x, w)| (x, w.ln())).unzip();
        Ok(Self { nodes, log_weights, center: m, width: left.max(right) })
    }
}

fn log_aecp_spec(spec: &SingularSpectrum, point: QuaternionPoint) -> Result<f64> {
    let f = Integrand { spec, n: spec.n() as f64, r: point.r, tau: point.tau };
    let q = RadialQuadrature::build(&f)?;
    let terms: Vec<f64> = q.nodes.iter().zip(&q.log_weights).map(|(x, lw)| lw + f.log_value(*x)).collect();
    let v = log_sum_exp(terms);
    if !v.is_finite() {
        return Err(Error::Numerical(format!("log D is not finite at {point:?}")));
    }
    Ok(v)
}

/// The radial quadrature used by [`log_aecp`] at a given point.
pub fn radial_quadrature(x0: &ComplexMatrix, point: QuaternionPoint) -> Result<RadialQuadrature> {
    let spec = SpectralKernel::new(x0)?.spectrum(point.z)?;
    RadialQuadrature::build(&Integrand { spec: &spec, n: spec.n() as f64, r: point.r, tau: point.tau })
}

pub fn log_aecp(x0: &ComplexMatrix, point: QuaternionPoint) -> Result<LogAecpValue> {
    AecpEvaluator::new(x0)?.log_aecp(point)
}

/// Reuses the spectral structure of `X0` across many evaluations.
#[derive(Debug, Clone)]
pub struct AecpEvaluator {
    kernel: SpectralKernel,
}

impl AecpEvaluator {
    pub fn new(x0: &ComplexMatrix) -> Result<Self> {
        Ok(Self { kernel: SpectralKernel::new(x0)? })
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    pub fn log_aecp(&self, point: QuaternionPoint) -> Result<LogAecpValue> {
        let spec = self.kernel.spectrum(point.z)?;
        Ok(LogAecpValue { log_d: log_aecp_spec(&spec, point)?, n: self.n(), point })
    }

    /// Relative residual `|∂τD - (1/4n)(∂rr D + r⁻¹∂r D)| / |∂τD|` from
    /// central differences. At `r = 0` the radial operator is replaced by its
    /// limit `2∂rr D`.
    pub fn pde_residual(&self, point: QuaternionPoint, h_r: f64, h_tau: f64) -> Result<f64> {
        let spec = self.kernel.spectrum(point.z)?;
        let (dtau, lap) = stencil(
            |r, tau| log_aecp_spec(&spec, QuaternionPoint::new(point.z, r, tau)?),
            point,
            h_r,
            h_tau,
            self.n(),
        )?;
        Ok((dtau - lap).abs() / dtau.abs())
    }

    /// Residual of the frozen evolution `D(τ) = D0`, normalized by the size
    /// of the diffusion term since `∂τ D0 = 0`. Order one by construction.
    pub fn frozen_residual(&self, point: QuaternionPoint, h_r: f64, h_tau: f64) -> Result<f64> {
        let spec = self.kernel.spectrum(point.z)?;
        let (dtau, lap) = stencil(|r, _| Ok(spec.log_det_shifted(r * r)), point, h_r, h_tau, self.n())?;
        Ok((dtau - lap).abs() / lap.abs())
    }
}

/// `(∂τD, (1/4n)ΔD) / D` at `point` by central differences of `log D`.
fn stencil(
    log_d: impl Fn(f64, f64) -> Result<f64>,
    point: QuaternionPoint,
    h_r: f64,
    h_tau: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let QuaternionPoint { r, tau, .. } = point;
    if !(h_r > 0.0 && h_tau > 0.0) {
        return Err(Error::StepSize("finite-difference steps must be > 0".into()));
    }
    if h_tau >= tau {
        return Err(Error::StepSize(format!("h_tau = {h_tau} must be below tau = {tau}")));
    }
    if r > 0.0 && r <= 2.0 * h_r {
        return Err(Error::invalid(format!("r = {r} too close to 0 for step {h_r}; use r = 0")));
    }
    let c = log_d(r, tau)?;
    let rel = |v: f64| (v - c).exp();
    let dt = rel(log_d(r, tau + h_tau)?) - rel(log_d(r, tau - h_tau)?);
    let radial = if r == 0.0 {
        let d = rel(log_d(h_r, tau)?) - 1.0;
        check_difference(d, "radial")?;
        // ∂rr D(0) ≈ 2(D(h) - D(0))/h², and the Laplacian tends to 2∂rr
        4.0 * d / (h_r * h_r)
    } else {
        let p = rel(log_d(r + h_r, tau)?);
        let m = rel(log_d(r - h_r, tau)?);
        check_difference(p - m, "radial")?;
        (p - 2.0 + m) / (h_r * h_r) + (p - m) / (2.0 * h_r * r)
    };
    Ok((dt / (2.0 * h_tau), radial / (4.0 * n as f64)))
}

fn check_difference(d: f64, what: &str) -> Result<()> {
    if d == 0.0 || d.abs() < 1e3 * f64::EPSILON {
        return Err(Error::StepSize(format!("{what} difference {d:e} lost to round-off; increase the step")));
    }
    Ok(())
}

pub fn pde_residual(x0: &ComplexMatrix, point: QuaternionPoint, h_r: f64, h_tau: f64) -> Result<f64> {
    AecpEvaluator::new(x0)?.pde_residual(point, h_r, h_tau)
}

/// Brute-force `⟨det((z - X)(z - X)† + r²)⟩` over `samples` draws of
/// `X(τ)`. Returns the sample mean and its standard error.
pub fn mc_determinant_oracle<R: Rng + ?Sized>(
    x0: &ComplexMatrix,
    point: QuaternionPoint,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    let n = x0.n();
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        let x = sample_evolved(x0, point.tau, rng)?;
        let a = faer::Mat::from_fn(n, n, |i, j| {
            let d = if i == j { point.z } else { Complex64::new(0.0, 0.0) };
            d - x.get(i, j)
        });
        let mut m = &a * a.adjoint();
        for i in 0..n {
            m[(i, i)] += point.r * point.r;
        }
        let d = m.determinant().re;
        sum += d;
        sum2 += d * d;
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = ((sum2 - k * mean * mean) / (k - 1.0)).max(0.0);
    Ok((mean, (var / k).sqrt()))
}

/// Closed-form `ln D` for `X0 = 0`:
/// `D = n! (τ/n)^n Σ_k L_{n-k}(-nr²/τ) (n|z|²/τ)^k / k!`.
///
/// No `e^{-nr²/τ}` prefactor: at `n = 1` the sum is `|z|² + τ + r²`, which is
/// `⟨|z - X|² + r²⟩` directly.
pub fn aecp_ginibre_closed(n: usize, z: Complex64, r: f64, tau: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let p = QuaternionPoint::new(z, r, tau)?;
    let nf = n as f64;
    let x = -nf * p.r * p.r / p.tau;
    let lag = ln_laguerre_nonpositive(n, x);
    let w = nf * z.norm_sqr() / p.tau;
    let sum = if w == 0.0 {
        lag[n]
    } else {
        let lw = w.ln();
        log_sum_exp((0..=n).map(|k| lag[n - k] + k as f64 * lw - ln_factorial(k as u64)).collect::<Vec<_>>())
    };
    Ok(ln_factorial(n as u64) + nf * (p.tau / nf).ln() + sum)
}

/// A complex number stored as `exp(log_abs + i·phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogComplex {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs.exp(), self.phase)
    }
}

/// `ln Σ_{k<m} w^k/k!` with `w` complex, as magnitude and phase.
fn log_truncated_exp(m: usize, w: Complex64) -> LogComplex {
    if w == Complex64::new(0.0, 0.0) {
        return LogComplex { log_abs: 0.0, phase: 0.0 };
    }
    let (lw, theta) = (w.norm().ln(), w.arg());
    let logs: Vec<f64> = (0..m).map(|k| k as f64 * lw - ln_factorial(k as u64)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: Complex64 = logs
        .iter()
        .enumerate()
        .map(|(k, l)| Complex64::from_polar((l - top).exp(), k as f64 * theta))
        .sum();
    LogComplex { log_abs: top + s.norm().ln(), phase: s.arg() }
}

/// Two-argument continuation
/// `D^{(N-1)}([z, v], τ) = (τ/N)^{N-1} Γ(N) Σ_{k<N} (N z v̄/τ)^k / k!`.
///
/// At `v = z` this equals the size-`(N-1)` Ginibre AECP at `r = 0` and time
/// `τ(N-1)/N`.
pub fn two_arg_aecp(n_kernel: usize, z: Complex64, v: Complex64, tau: f64) -> Result<LogComplex> {
    check_kernel_args(n_kernel, tau)?;
    let nf = n_kernel as f64;
    let s = log_truncated_exp(n_kernel, z * v.conj() * (nf / tau));
    Ok(LogComplex {
        log_abs: (nf - 1.0) * (tau / nf).ln() + ln_factorial(n_kernel as u64 - 1) + s.log_abs,
        phase: s.phase,
    })
}

/// `K_N(z, v) = (1/τπ) exp(-(N/2τ)(|z|² + |v|²)) Σ_{k<N} (N z v̄/τ)^k / k!`,
/// normalized so that `∫ K_N(z, z) d²z = 1`.
pub fn kernel_k(n_kernel: usize, z: Complex64, v: Complex64, tau: f64) -> Result<LogComplex> {
    check_kernel_args(n_kernel, tau)?;
    let nf = n_kernel as f64;
    let s = log_truncated_exp(n_kernel, z * v.conj() * (nf / tau));
    Ok(LogComplex {
        log_abs: -(tau * PI).ln() - nf / (2.0 * tau) * (z.norm_sqr() + v.norm_sqr()) + s.log_abs,
        phase: s.phase,
    })
}

/// `∫ K_N(z, z) d²z` by Gauss–Legendre in `|z|²` out to where the
/// incomplete-gamma tail is below `e^{-70}`.
pub fn kernel_trace_integral(n_kernel: usize, tau: f64) -> Result<f64> {
    check_kernel_args(n_kernel, tau)?;
    let nf = n_kernel as f64;
    let s_max = tau * (nf + 12.0 * nf.sqrt() + 60.0) / nf;
    let mut err = None;
    let v = GaussLegendre::standard().integrate(0.0, s_max, 32, |s| {
        let z = Complex64::new(s.max(0.0).sqrt(), 0.0);
        match kernel_k(n_kernel, z, z, tau) {
            Ok(k) => PI * k.value().re,
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    });
    err.map_or(Ok(v), Err)
}

/// `∫ K_N(z, w) K_N(w, u) d²w` in polar coordinates: periodic trapezoid in
/// the angle (exact, the integrand is a trigonometric polynomial of degree
/// below `N`) and Gauss–Legendre in the radius.
pub fn kernel_convolution(n_kernel: usize, z: Complex64, u: Complex64, tau: f64) -> Result<Complex64> {
    check_kernel_args(n_kernel, tau)?;
    let nf = n_kernel as f64;
    let angles = (4 * n_kernel).max(64);
    let rho_max = z.norm() + u.norm() + 2.0 * tau.sqrt() + 12.0 * (tau / nf).sqrt();
    let mut err = None;
    let mut ring = |rho: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..angles {
            let w = Complex64::from_polar(rho, 2.0 * PI * k as f64 / angles as f64);
            match (kernel_k(n_kernel, z, w, tau), kernel_k(n_kernel, w, u, tau)) {
                (Ok(a), Ok(b)) => acc += a.value() * b.value(),
                (Err(e), _) | (_, Err(e)) => err = Some(e),
            }
        }
        acc * (2.0 * PI * rho / angles as f64)
    };
    let gl = GaussLegendre::standard();
    let panels = 16;
    let h = rho_max / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = p as f64 * h;
        for (x, wgt) in gl.mapped(lo, lo + h) {
            total += ring(x) * wgt;
        }
    }
    err.map_or(Ok(total), Err)
}

fn check_kernel_args(n_kernel: usize, tau: f64) -> Result<()> {
    if n_kernel == 0 {
        return Err(Error::invalid("kernel size must be >= 1"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be finite and > 0, got {tau}")));
    }
    Ok(())
}
