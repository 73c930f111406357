//! Monte-Carlo sampling of the matrix diffusion and of the planar Coulomb gas
//! Langevin system.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Default pairwise regularization of the Coulomb drift.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;

/// Independent per-trial stream: `seed ⊕ trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub tau_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl EnsembleConfig {
    pub fn new(n: usize, tau_list: Vec<f64>, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self { n, tau_list, trials, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        validate_tau_list(&self.tau_list)
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_list.last().copied().unwrap_or(0.0)
    }
}

pub fn validate_tau_list(tau_list: &[f64]) -> Result<()> {
    if tau_list.is_empty() {
        return Err(Error::invalid("tau_list is empty"));
    }
    if !tau_list.iter().all(|t| t.is_finite() && *t > 0.0) {
        return Err(Error::invalid("tau_list entries must be finite and > 0"));
    }
    if tau_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("tau_list must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub positions: Vec<Complex64>,
    pub time: f64,
}

impl ParticleCloud {
    pub fn center_of_mass(&self) -> Complex64 {
        self.positions.iter().sum::<Complex64>() / self.positions.len() as f64
    }

    /// Radius of the uniform disk with the same second moment,
    /// `R = √(2⟨|λ - λ̄|²⟩)`.
    pub fn fitted_radius(&self) -> f64 {
        let c = self.center_of_mass();
        let m2 = self.positions.iter().map(|p| (p - c).norm_sqr()).sum::<f64>() / self.positions.len() as f64;
        (2.0 * m2).sqrt()
    }
}

fn gaussian_increment<R: Rng + ?Sized>(x: &mut ComplexMatrix, scale: f64, rng: &mut R) {
    let n = x.n();
    // column-major fill order keeps the stream layout independent of storage
    for j in 0..n {
        for i in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = x.get(i, j) + Complex64::new(scale * re, scale * im);
            x.set(i, j, v);
        }
    }
}

/// `X(τ) = X0 + √(τ/2n)(G_re + i G_im)`, exact at any `τ`.
pub fn sample_evolved<R: Rng + ?Sized>(x0: &ComplexMatrix, tau: f64, rng: &mut R) -> Result<ComplexMatrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be finite and > 0, got {tau}")));
    }
    let mut x = x0.clone();
    gaussian_increment(&mut x, (tau / (2.0 * x0.n() as f64)).sqrt(), rng);
    Ok(x)
}

/// Snapshots of one Brownian path at the times in `tau_list`.
pub fn evolve_path<R: Rng + ?Sized>(x0: &ComplexMatrix, tau_list: &[f64], rng: &mut R) -> Result<Vec<ComplexMatrix>> {
    validate_tau_list(tau_list)?;
    let n = x0.n() as f64;
    let mut x = x0.clone();
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(tau_list.len());
    for &tau in tau_list {
        gaussian_increment(&mut x, ((tau - prev) / (2.0 * n)).sqrt(), rng);
        out.push(x.clone());
        prev = tau;
    }
    Ok(out)
}

/// Euler–Maruyama integration of
/// `dλ_i = dB_i + Σ_{j≠i} (λ_i - λ_j)/max(|λ_i - λ_j|², reg²) dt`
/// from `λ_i(0) = 0`, with `B_i` a planar Brownian motion (each component
/// has variance `dt` per step).
///
/// The drift between two particles is bounded by `1/reg`, so steps well
/// below `reg²/n` keep the scheme stable even through near-collisions; in
/// practice the noise separates particles fast enough that much larger steps
/// are harmless.
pub fn coulomb_gas_simulate<R: Rng + ?Sized>(
    n: usize,
    step: f64,
    horizon: f64,
    regularization: f64,
    rng: &mut R,
) -> Result<ParticleCloud> {
    if n < 2 {
        return Err(Error::invalid("Coulomb gas needs at least 2 particles"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::StepSize(format!("step must be finite and > 0, got {step}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    if !(regularization > 0.0 && regularization.is_finite()) {
        return Err(Error::invalid("regularization must be finite and > 0"));
    }
    let reg2 = regularization * regularization;
    let mut pos = vec![Complex64::new(0.0, 0.0); n];
    let mut drift = vec![Complex64::new(0.0, 0.0); n];
    let steps = (horizon / step).ceil() as usize;
    let mut t = 0.0;
    for k in 0..steps {
        let dt = (horizon - t).min(step);
        drift.iter_mut().for_each(|d| *d = Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pos[i] - pos[j];
                let f = d / d.norm_sqr().max(reg2);
                drift[i] += f;
                drift[j] -= f;
            }
        }
        let sd = dt.sqrt();
        for i in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            pos[i] += drift[i] * dt + Complex64::new(sd * re, sd * im);
        }
        t = if k + 1 == steps { horizon } else { t + dt };
        if pos.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(Error::IntegrationBlowup { step: k, time: t });
        }
    }
    Ok(ParticleCloud { positions: pos, time: t })
}

/// Kolmogorov–Smirnov distance between the empirical law of `|λ - c|` and the
/// uniform-disk radial CDF `(r/R)²`.
pub fn uniform_disk_ks(radii: &[f64], radius: f64) -> f64 {
    let mut r: Vec<f64> = radii.to_vec();
    r.sort_by(f64::total_cmp);
    let m = r.len() as f64;
    r.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = (x / radius).powi(2).min(1.0);
            (f - k as f64 / m).abs().max(((k + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_initial, InitialCondition};

    #[test]
    fn config_validation() {
        assert!(EnsembleConfig::new(4, vec![0.5, 1.0], 2, 0).is_ok());
        assert!(EnsembleConfig::new(4, vec![1.0, 1.0], 2, 0).is_err());
        assert!(EnsembleConfig::new(4, vec![0.0, 1.0], 2, 0).is_err());
        assert!(EnsembleConfig::new(4, vec![], 2, 0).is_err());
        assert!(EnsembleConfig::new(4, vec![1.0], 0, 0).is_err());
        assert!(EnsembleConfig::new(0, vec![1.0], 1, 0).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let x0 = build_initial(&InitialCondition::Jordan(Complex64::new(1.0, 0.0)), 5).unwrap();
        let a = sample_evolved(&x0, 0.3, &mut trial_rng(9, 2)).unwrap();
        let b = sample_evolved(&x0, 0.3, &mut trial_rng(9, 2)).unwrap();
        let c = sample_evolved(&x0, 0.3, &mut trial_rng(9, 3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_tau_stays_close() {
        let x0 = build_initial(&InitialCondition::Spiric(Complex64::new(1.0, 0.5)), 6).unwrap();
        let x = sample_evolved(&x0, 1e-20, &mut trial_rng(1, 0)).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((x.get(i, j) - x0.get(i, j)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn single_time_path_matches_sample() {
        let x0 = ComplexMatrix::zeros(4);
        let p = evolve_path(&x0, &[0.7], &mut trial_rng(3, 0)).unwrap();
        let s = sample_evolved(&x0, 0.7, &mut trial_rng(3, 0)).unwrap();
        assert_eq!(p[0], s);
    }

    #[test]
    fn coulomb_gas_basics() {
        let c = coulomb_gas_simulate(5, 1e-3, 0.0, DEFAULT_REGULARIZATION, &mut trial_rng(0, 0)).unwrap();
        assert!(c.positions.iter().all(|p| *p == Complex64::new(0.0, 0.0)));
        assert_eq!(c.time, 0.0);
        for seed in 0..20 {
            let c = coulomb_gas_simulate(2, 1e-3, 0.01, DEFAULT_REGULARIZATION, &mut trial_rng(seed, 0)).unwrap();
            assert!((c.positions[0] - c.positions[1]).norm() > 0.0);
            assert!((c.time - 0.01).abs() < 1e-15);
        }
        assert!(coulomb_gas_simulate(1, 1e-3, 1.0, 1e-6, &mut trial_rng(0, 0)).is_err());
        assert!(matches!(
            coulomb_gas_simulate(3, 0.0, 1.0, 1e-6, &mut trial_rng(0, 0)),
            Err(Error::StepSize(_))
        ));
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let m = 1000;
        let radii: Vec<f64> = (0..m).map(|k| ((k as f64 + 0.5) / m as f64).sqrt()).collect();
        assert!(uniform_disk_ks(&radii, 1.0) <= 0.5 / m as f64 + 1e-12);
        assert!(uniform_disk_ks(&radii, 2.0) > 0.5);
    }
}
