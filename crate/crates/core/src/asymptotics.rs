//! Universal finite-`n` profiles of the AECP near the Ginibre edge, the
//! spiric collision and the origin of the Jordan-shift evolution, and a
//! shape-comparison harness against the exact quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::aecp::AecpEvaluator;
use crate::error::{Error, Result};
use crate::matrix::{build_initial, ComplexMatrix, InitialCondition};
use crate::special::erfc;
use crate::spectrum::QuaternionPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileFamily {
    GinibreEdge,
    SpiricCollision,
    JordanOrigin,
}

/// A profile sampled along one scaling coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingProfile {
    pub family: ProfileFamily,
    /// `τ` for the Ginibre edge, `t` otherwise.
    pub parameter: f64,
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalingProfile {
    pub fn sample(family: ProfileFamily, parameter: f64, n: usize, coords: &[f64]) -> Result<Self> {
        let values = coords
            .iter()
            .map(|&x| match family {
                ProfileFamily::GinibreEdge => Ok(ginibre_edge_profile(x, parameter)),
                ProfileFamily::SpiricCollision => Ok(spiric_collision_profile(Complex64::new(x, 0.0), parameter, n)),
                ProfileFamily::JordanOrigin => jordan_origin_profile(x, parameter),
            })
            .collect::<Result<Vec<_>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("profile is not finite on the sampled window".into()));
        }
        Ok(Self { family, parameter, coords: coords.to_vec(), values })
    }
}

/// `(1/2πτ) erfc(√(2/τ) η)` at `z = √τ + η n^{-1/2}`.
pub fn ginibre_edge_profile(eta: f64, tau: f64) -> f64 {
    erfc((2.0 / tau).sqrt() * eta) / (2.0 * PI * tau)
}

/// The reference collision profile at `z = η n^{-1/4}`, `τ = 1 + t n^{-1/2}`,
/// `a = 1`:
/// `√(π/128n) exp(-(√n/2)((η+η̄)² - 2|η|²)) (η+η̄)⁴ erfc((|η|² - (η+η̄)² - t)/√2)`.
pub fn spiric_collision_profile(eta: Complex64, t: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = 2.0 * eta.re;
    let e2 = eta.norm_sqr();
    (PI / (128.0 * nf)).sqrt()
        * (-(nf.sqrt() / 2.0) * (s * s - 2.0 * e2)).exp()
        * s.powi(4)
        * erfc((e2 - s * s - t) / 2f64.sqrt())
}

/// Leading-order collision profile from a direct saddle expansion of the
/// radial integral at `r = 0`, in log form:
/// `-√n Re η² + (|η|⁴ - 2(Re η²)²)/2 + s²/2 + ln(√(π/2) erfc(-s/√2))`,
/// `s = t + |η|² + 2 Re η²`.
pub fn spiric_collision_leading_log(eta: Complex64, t: f64, n: usize) -> f64 {
    let re2 = (eta * eta).re;
    let e2 = eta.norm_sqr();
    let s = t + e2 + 2.0 * re2;
    -(n as f64).sqrt() * re2 + 0.5 * (e2 * e2 - 2.0 * re2 * re2) + 0.5 * s * s
        + ((PI / 2.0).sqrt() * erfc(-s / 2f64.sqrt())).ln()
}

/// The one-saddle origin profile at `z = α = x n^{-1/6}`, `τ = t n^{-4/3}`:
/// `t/2 + (t√(πt)/4x) exp(t/4x²) erfc(-√t/2x)`.
pub fn jordan_origin_profile(x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("origin profile diverges at x = {x}; need x > 0")));
    }
    Ok(t / 2.0 + t * (PI * t).sqrt() / (4.0 * x) * (t / (4.0 * x * x)).exp() * erfc(-t.sqrt() / (2.0 * x)))
}

/// Origin profile with both saddle contributions kept,
/// `(t/2)[I₊ + I₋]` with `c = √t/x` and
/// `I± = 1 ± (c√π/2) e^{c²/4} erfc(∓c/2)`.
/// The one-saddle profile is `(t/2) I₊` alone. This form equals
/// `D/|α|^{2n}` itself, with no fitted constant.
pub fn jordan_origin_symmetric(x: f64, t: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("origin profile needs x > 0, got {x}")));
    }
    let c = t.sqrt() / x;
    let k = c * PI.sqrt() / 2.0 * (c * c / 4.0).exp();
    let plus = 1.0 + k * erfc(-c / 2.0);
    let minus = 1.0 - k * erfc(c / 2.0);
    Ok(t / 2.0 * (plus + minus))
}

fn evaluator(x0: &ComplexMatrix) -> Result<AecpEvaluator> {
    AecpEvaluator::new(x0)
}

/// Exact edge ratio
/// `D(√τ + η n^{-1/2}) e^{-n(|z|² - τ)/τ} / D(√τ)` from the quadrature. The
/// Gaussian factor is the determinantal weight `w(z) = e^{-n|z|²/τ}`; without
/// it the raw ratio is dominated by `|z|^{2n}` growth.
pub fn ginibre_edge_exact_ratio(n: usize, etas: &[f64], tau: f64) -> Result<Vec<f64>> {
    let ev = evaluator(&ComplexMatrix::zeros(n))?;
    let nf = n as f64;
    let edge = tau.sqrt();
    let log_at = |z: f64| ev.log_aecp(QuaternionPoint::new(Complex64::new(z, 0.0), 0.0, tau)?).map(|v| v.log_d);
    let base = log_at(edge)?;
    etas.iter()
        .map(|&eta| {
            let z = edge + eta / nf.sqrt();
            Ok((log_at(z)? - base - nf * (z * z - tau) / tau).exp())
        })
        .collect()
}

/// `ln D(η n^{-1/4}, 0, 1 + t n^{-1/2})` for `Spiric(1)`, with the
/// `|a|^{2n} = 1` scale already trivial.
pub fn spiric_collision_exact_log(n: usize, etas: &[Complex64], t: f64) -> Result<Vec<f64>> {
    let x0 = build_initial(&InitialCondition::Spiric(Complex64::new(1.0, 0.0)), n)?;
    let ev = evaluator(&x0)?;
    let nf = n as f64;
    let tau = 1.0 + t / nf.sqrt();
    etas.iter()
        .map(|eta| Ok(ev.log_aecp(QuaternionPoint::new(eta * nf.powf(-0.25), 0.0, tau)?)?.log_d))
        .collect()
}

/// `ln(D/|α|^{2n})` at `z = α = x n^{-1/6}`, `τ = t n^{-4/3}`, `r = 0` for the
/// Jordan shift. The `|α|^{2n}` factor is the trivial scale of `det 𝓜`.
pub fn jordan_origin_exact_log(n: usize, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let tau = t * nf.powf(-4.0 / 3.0);
    xs.iter()
        .map(|&x| {
            let alpha = x * nf.powf(-1.0 / 6.0);
            let x0 = build_initial(&InitialCondition::Jordan(Complex64::new(alpha, 0.0)), n)?;
            let v = evaluator(&x0)?.log_aecp(QuaternionPoint::new(Complex64::new(alpha, 0.0), 0.0, tau)?)?;
            Ok(v.log_d - 2.0 * nf * alpha.ln())
        })
        .collect()
}

/// Shape comparison with one fitted multiplicative constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTest {
    pub coords: Vec<f64>,
    pub log_exact: Vec<f64>,
    pub log_profile: Vec<f64>,
    /// Fitted `ln C` with `exact ≈ C · profile`.
    pub log_constant: f64,
    /// `max |exact / (C · profile) - 1|`.
    pub max_rel_deviation: f64,
}

impl ShapeTest {
    /// The constant minimizing the worst log-ratio (midrange of
    /// `ln exact - ln profile`).
    pub fn fit(coords: Vec<f64>, log_exact: Vec<f64>, log_profile: Vec<f64>) -> Result<Self> {
        if coords.len() != log_exact.len() || coords.len() != log_profile.len() || coords.is_empty() {
            return Err(Error::invalid("shape test needs equally long, non-empty samples"));
        }
        let diffs: Vec<f64> = log_exact.iter().zip(&log_profile).map(|(a, b)| a - b).collect();
        if diffs.iter().any(|d| !d.is_finite()) {
            return Err(Error::Numerical("non-finite log ratio in shape test".into()));
        }
        let lo = diffs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_constant = 0.5 * (lo + hi);
        let max_rel_deviation = diffs.iter().map(|d| ((d - log_constant).exp() - 1.0).abs()).fold(0.0, f64::max);
        Ok(Self { coords, log_exact, log_profile, log_constant, max_rel_deviation })
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_deviation < tolerance
    }
}

pub fn spiric_shape_test(n: usize, etas: &[f64], t: f64) -> Result<ShapeTest> {
    let z: Vec<Complex64> = etas.iter().map(|e| Complex64::new(*e, 0.0)).collect();
    let exact = spiric_collision_exact_log(n, &z, t)?;
    let profile = z.iter().map(|e| spiric_collision_profile(*e, t, n).ln()).collect();
    ShapeTest::fit(etas.to_vec(), exact, profile)
}

pub fn jordan_shape_test(n: usize, xs: &[f64], t: f64) -> Result<ShapeTest> {
    let exact = jordan_origin_exact_log(n, xs, t)?;
    let profile = xs.iter().map(|x| jordan_origin_profile(*x, t).map(f64::ln)).collect::<Result<_>>()?;
    ShapeTest::fit(xs.to_vec(), exact, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_profile_limits() {
        assert!((ginibre_edge_profile(0.0, 0.7) - 1.0 / (2.0 * PI * 0.7)).abs() < 1e-15);
        assert!((ginibre_edge_profile(-40.0, 1.0) - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn spiric_profile_limits() {
        assert_eq!(spiric_collision_profile(Complex64::new(0.0, 1.3), 0.4, 100), 0.0);
        let eta = Complex64::new(0.3, 0.2);
        let s = 2.0 * eta.re;
        let base = spiric_collision_profile(eta, eta.norm_sqr() - s * s, 100);
        let far = spiric_collision_profile(eta, 60.0, 100);
        assert!((far / base - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jordan_profile_limits() {
        assert!(matches!(jordan_origin_profile(0.0, 1.0), Err(Error::Domain(_))));
        assert!((jordan_origin_profile(1e7, 1.0).unwrap() - 0.5).abs() < 1e-6);
        assert!((jordan_origin_symmetric(1e7, 1.0).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn shape_fit_is_exact_for_proportional_data() {
        let x = vec![1.0, 2.0, 3.0];
        let p = vec![0.1, -0.4, 2.0];
        let e: Vec<f64> = p.iter().map(|v| v + 1.7).collect();
        let s = ShapeTest::fit(x, e, p).unwrap();
        assert!((s.log_constant - 1.7).abs() < 1e-15 && s.max_rel_deviation < 1e-15);
    }

    #[test]
    fn jordan_exact_matches_symmetric_profile_at_small_n() {
        let xs = [0.5, 1.0, 2.0];
        let exact = jordan_origin_exact_log(300, &xs, 1.0).unwrap();
        let sym: Vec<f64> = xs.iter().map(|x| jordan_origin_symmetric(*x, 1.0).unwrap().ln()).collect();
        let s = ShapeTest::fit(xs.to_vec(), exact, sym).unwrap();
        assert!(s.max_rel_deviation < 0.01, "{}", s.max_rel_deviation);
        assert!(s.log_constant.abs() < 0.01, "{}", s.log_constant);
    }

    proptest! {
        #[test]
        fn edge_profile_decreasing(a in -2.0f64..2.0, d in 0.01f64..2.0, tau in 0.5f64..4.0) {
            prop_assert!(ginibre_edge_profile(a + d, tau) < ginibre_edge_profile(a, tau));
        }

        #[test]
        fn jordan_profile_increases_toward_origin(x in 0.2f64..5.0, d in 0.01f64..1.0, t in 0.1f64..3.0) {
            prop_assert!(jordan_origin_profile(x, t).unwrap() > jordan_origin_profile(x + d, t).unwrap());
        }

        #[test]
        fn profiles_nonnegative(x in 0.05f64..5.0, y in -3.0f64..3.0, t in -3.0f64..3.0) {
            prop_assert!(ginibre_edge_profile(y, x) >= 0.0);
            prop_assert!(spiric_collision_profile(Complex64::new(y, x), t, 1000) >= 0.0);
            prop_assert!(jordan_origin_profile(x, t.abs() + 0.01).unwrap() >= 0.0);
        }
    }
}
