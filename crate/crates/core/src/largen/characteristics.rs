//! Radial Burgers characteristics `r(τ) = r* - τ ν0(z, r*)` and the shock
//! (caustic apex) time.

use num_complex::Complex64;

use super::closed::Family;
use crate::error::{Error, Result};
use crate::spectrum::SingularSpectrum;

/// Initial radial velocity `ν0(z, r) = ∂_r φ0 / 2` at a fixed spectator `z`.
#[derive(Debug, Clone, PartialEq)]
pub enum Nu0 {
    /// `r (1/n) Σ 1/(s_i + r²)` for an equally weighted spectrum.
    Spectrum(Vec<f64>),
    /// `r/Δ`, `Δ = √((|z|² + r² + |α|²)² - 4|z|²|α|²)`, the large-`n` shift
    /// matrix velocity.
    Jordan { z2: f64, alpha2: f64 },
}

impl Nu0 {
    pub fn for_family(family: Family, z: Complex64) -> Self {
        match family {
            Family::Ginibre => Self::Spectrum(vec![z.norm_sqr()]),
            Family::Spiric(a) => Self::Spectrum(vec![(z - a).norm_sqr(), (z + a).norm_sqr()]),
            Family::Jordan(alpha) => Self::Jordan { z2: z.norm_sqr(), alpha2: alpha.norm_sqr() },
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self {
            Self::Spectrum(s) => r * s.iter().map(|v| 1.0 / (v + r * r)).sum::<f64>() / s.len() as f64,
            Self::Jordan { z2, alpha2 } => r / self.jordan_delta(*z2, *alpha2, r),
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            Self::Spectrum(s) => {
                let k = s.len() as f64;
                let m: f64 = s.iter().map(|v| 1.0 / (v + r * r)).sum::<f64>() / k;
                let m2: f64 = s.iter().map(|v| (v + r * r).powi(-2)).sum::<f64>() / k;
                m - 2.0 * r * r * m2
            }
            Self::Jordan { z2, alpha2 } => {
                let d = self.jordan_delta(*z2, *alpha2, r);
                let a = z2 + r * r + alpha2;
                1.0 / d - 2.0 * r * r * a / d.powi(3)
            }
        }
    }

    fn jordan_delta(&self, z2: f64, alpha2: f64, r: f64) -> f64 {
        let a = z2 + r * r + alpha2;
        (a * a - 4.0 * z2 * alpha2).max(0.0).sqrt()
    }

    /// Shock time of the `r* → 0⁺` family of lines, `1/ν0'(0)`.
    pub fn limit_shock_time(&self) -> f64 {
        1.0 / self.derivative(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicLine {
    pub z: Complex64,
    pub r_start: f64,
    /// `(τ, r)` samples, ending at the first crossing of `r = 0`.
    pub points: Vec<(f64, f64)>,
    pub crossing_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicsField {
    pub lines: Vec<CharacteristicLine>,
    /// Earliest time at which characteristics meet: the minimum over labels
    /// (and the `r* → 0⁺` limit) of the crossing time `r*/ν0` and the
    /// envelope time `1/ν0'`.
    pub shock_time: f64,
}

const SAMPLES: usize = 201;

fn build(z: Complex64, nu0: &Nu0, labels: &[f64], tau_max: f64) -> Result<CharacteristicsField> {
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::invalid("tau_max must be finite and > 0"));
    }
    if labels.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(Error::invalid("labels must be finite and >= 0"));
    }
    let mut shock = nu0.limit_shock_time();
    let mut lines = Vec::with_capacity(labels.len());
    for &r0 in labels {
        let v = nu0.value(r0);
        let crossing = (r0 > 0.0 && v > 0.0).then(|| r0 / v);
        if let Some(t) = crossing {
            shock = shock.min(t);
        }
        let dv = nu0.derivative(r0);
        if r0 > 0.0 && dv > 0.0 {
            shock = shock.min(1.0 / dv);
        }
        let mut points = Vec::with_capacity(SAMPLES);
        for k in 0..SAMPLES {
            let tau = tau_max * k as f64 / (SAMPLES - 1) as f64;
            match crossing {
                Some(t) if tau >= t => {
                    points.push((t, 0.0));
                    break;
                }
                _ => points.push((tau, r0 - tau * v)),
            }
        }
        lines.push(CharacteristicLine { z, r_start: r0, points, crossing_time: crossing.filter(|t| *t <= tau_max) });
    }
    Ok(CharacteristicsField { lines, shock_time: shock })
}

pub fn characteristics_field(family: Family, z: Complex64, labels: &[f64], tau_max: f64) -> Result<CharacteristicsField> {
    build(z, &Nu0::for_family(family, z), labels, tau_max)
}

pub fn characteristics_from_spectrum(spec: &SingularSpectrum, labels: &[f64], tau_max: f64) -> Result<CharacteristicsField> {
    build(spec.z, &Nu0::Spectrum(spec.values.clone()), labels, tau_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn labels() -> Vec<f64> {
        (0..=40).map(|k| 0.05 * k as f64).collect()
    }

    #[test]
    fn shock_times() {
        let z = c(0.5, 0.3);
        let g = characteristics_field(Family::Ginibre, z, &labels(), 2.0).unwrap();
        assert!((g.shock_time - z.norm_sqr()).abs() < 1e-14);
        let a = c(1.0, 0.2);
        let s = characteristics_field(Family::Spiric(a), z, &labels(), 2.0).unwrap();
        let want = (a * a - z * z).norm_sqr() / (a.norm_sqr() + z.norm_sqr());
        assert!((s.shock_time - want).abs() < 1e-14);
        let j = characteristics_field(Family::Jordan(c(1.0, 0.0)), z, &labels(), 2.0).unwrap();
        assert!((j.shock_time - (z.norm_sqr() - 1.0).abs()).abs() < 1e-14);
    }

    #[test]
    fn zero_label_is_static() {
        let f = characteristics_field(Family::Ginibre, c(0.5, 0.0), &[0.0], 1.0).unwrap();
        assert!(f.lines[0].points.iter().all(|(_, r)| *r == 0.0));
        assert_eq!(f.lines[0].crossing_time, None);
    }

    #[test]
    fn lines_stop_at_crossing() {
        let f = characteristics_field(Family::Ginibre, c(0.5, 0.0), &[0.3], 3.0).unwrap();
        let line = &f.lines[0];
        let t = line.crossing_time.unwrap();
        assert!((t - (0.25 + 0.09)).abs() < 1e-14);
        assert_eq!(*line.points.last().unwrap(), (t, 0.0));
        assert!(line.points.iter().all(|(_, r)| *r >= 0.0));
    }

    proptest! {
        #[test]
        fn derivative_matches_difference(r in 0.01f64..3.0, x in 0.0f64..2.0, y in 0.0f64..2.0, al in 0.1f64..2.0) {
            let z = c(x, y);
            for nu in [Nu0::for_family(Family::Spiric(c(al, 0.3)), z), Nu0::for_family(Family::Jordan(c(al, 0.0)), z)] {
                let h = 1e-6;
                let fd = (nu.value(r + h) - nu.value(r - h)) / (2.0 * h);
                prop_assert!((fd - nu.derivative(r)).abs() <= 1e-5 * (1.0 + fd.abs()));
            }
        }
    }
}
