//! Eigenvalues, biorthogonal eigenvector overlaps and binned estimators of
//! the eigenvalue density `ρ(z, τ)` and the overlap field `O(z, τ)`.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::mc::{evolve_path, trial_rng, EnsembleConfig};

/// Condition number of the right-eigenvector matrix above which a sample is
/// treated as defective.
pub const CONDITION_LIMIT: f64 = 1e14;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    pub eigenvalues: Vec<Complex64>,
    pub overlaps: Vec<f64>,
}

impl EnsembleSample {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn norm1(m: &Mat<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues and diagonal overlaps `O_αα = ⟨L_α|L_α⟩⟨R_α|R_α⟩`, with the
/// left eigenvectors taken as the rows of `R⁻¹`.
pub fn spectral_decompose(x: &ComplexMatrix) -> Result<EnsembleSample> {
    if !x.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = x.n();
    let evd = x
        .as_mat()
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let mut r = evd.U().to_owned();
    for j in 0..n {
        let norm = (0..n).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NearDefective { condition: f64::INFINITY, limit: CONDITION_LIMIT });
        }
        for i in 0..n {
            r[(i, j)] /= norm;
        }
    }
    let l = r.partial_piv_lu().inverse();
    let condition = norm1(&r) * norm1(&l);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::NearDefective { condition, limit: CONDITION_LIMIT });
    }
    let eigenvalues = (0..n).map(|a| evd.S()[a]).collect();
    let overlaps = (0..n)
        .map(|a| {
            let left = (0..n).map(|j| l[(a, j)].norm_sqr()).sum::<f64>();
            let right = (0..n).map(|i| r[(i, a)].norm_sqr()).sum::<f64>();
            left * right
        })
        .collect();
    Ok(EnsembleSample { eigenvalues, overlaps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = Self { x_min, x_max, y_min, y_max, nx, ny };
        g.validate()?;
        Ok(g)
    }

    /// 200×200 bins over `[-1.6√τ_max, 1.6√τ_max]²`.
    pub fn default_for(tau_max: f64) -> Self {
        let h = 1.6 * tau_max.sqrt();
        Self { x_min: -h, x_max: h, y_min: -h, y_max: h, nx: 200, ny: 200 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::invalid("grid bounds must be finite with min < max"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid must have at least one bin per axis"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / self.ny as f64
    }

    pub fn bin_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Flat index `ix·ny + iy` of the half-open bin containing `z`.
    pub fn bin_of(&self, z: Complex64) -> Option<usize> {
        let fx = (z.re - self.x_min) / self.dx();
        let fy = (z.im - self.y_min) / self.dy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        (ix < self.nx && iy < self.ny).then_some(ix * self.ny + iy)
    }

    pub fn center(&self, index: usize) -> Complex64 {
        let (ix, iy) = (index / self.ny, index % self.ny);
        Complex64::new(
            self.x_min + (ix as f64 + 0.5) * self.dx(),
            self.y_min + (iy as f64 + 0.5) * self.dy(),
        )
    }
}

/// Per-bin partial sums; merging is associative and commutative.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldAccumulator {
    pub grid: GridSpec,
    pub n: usize,
    pub counts: Vec<u64>,
    pub overlap_sums: Vec<f64>,
    pub spill: u64,
    pub trials: usize,
    pub dropped: usize,
}

impl FieldAccumulator {
    pub fn new(grid: GridSpec, n: usize) -> Self {
        let bins = grid.nx * grid.ny;
        Self { grid, n, counts: vec![0; bins], overlap_sums: vec![0.0; bins], spill: 0, trials: 0, dropped: 0 }
    }

    pub fn add(&mut self, sample: &EnsembleSample) -> Result<()> {
        if sample.n() != self.n || sample.overlaps.len() != self.n {
            return Err(Error::invalid(format!("sample has size {}, expected {}", sample.n(), self.n)));
        }
        for (z, o) in sample.eigenvalues.iter().zip(&sample.overlaps) {
            match self.grid.bin_of(*z) {
                Some(k) => {
                    self.counts[k] += 1;
                    self.overlap_sums[k] += o;
                }
                None => self.spill += 1,
            }
        }
        self.trials += 1;
        Ok(())
    }

    pub fn merge(mut self, other: Self) -> Result<Self> {
        if self.grid != other.grid || self.n != other.n {
            return Err(Error::invalid("cannot merge accumulators over different grids"));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.overlap_sums.iter_mut().zip(&other.overlap_sums).for_each(|(a, b)| *a += b);
        self.spill += other.spill;
        self.trials += other.trials;
        self.dropped += other.dropped;
        Ok(self)
    }

    pub fn finish(&self) -> Result<FieldGrid> {
        if self.trials == 0 {
            return Err(Error::invalid("no samples were accumulated"));
        }
        let area = self.grid.bin_area();
        let (t, n) = (self.trials as f64, self.n as f64);
        Ok(FieldGrid {
            grid: self.grid,
            rho: self.counts.iter().map(|&c| c as f64 / (t * n * area)).collect(),
            overlap: self.overlap_sums.iter().map(|&s| s / (t * n * n * area)).collect(),
            trials_used: self.trials,
            dropped: self.dropped,
            spill: self.spill,
            n: self.n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub grid: GridSpec,
    /// Indexed `ix·ny + iy`.
    pub rho: Vec<f64>,
    pub overlap: Vec<f64>,
    pub trials_used: usize,
    pub dropped: usize,
    pub spill: u64,
    pub n: usize,
}

impl FieldGrid {
    pub fn rho_at(&self, z: Complex64) -> Option<f64> {
        self.grid.bin_of(z).map(|k| self.rho[k])
    }

    pub fn overlap_at(&self, z: Complex64) -> Option<f64> {
        self.grid.bin_of(z).map(|k| self.overlap[k])
    }

    /// `Σ rho·A + spill/(trials·n)`, identically one.
    pub fn total_mass(&self) -> f64 {
        let a = self.grid.bin_area();
        self.rho.iter().sum::<f64>() * a + self.spill as f64 / (self.trials_used * self.n) as f64
    }

    pub fn overlap_integral(&self) -> f64 {
        self.overlap.iter().sum::<f64>() * self.grid.bin_area()
    }

    /// Rows `(x, y, rho, overlap)` in storage order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.rho.len()).map(|k| {
            let c = self.grid.center(k);
            (c.re, c.im, self.rho[k], self.overlap[k])
        })
    }
}

pub fn estimate_fields(samples: &[EnsembleSample], grid: GridSpec) -> Result<FieldGrid> {
    grid.validate()?;
    let first = samples.first().ok_or_else(|| Error::invalid("empty sample list"))?;
    let mut acc = FieldAccumulator::new(grid, first.n());
    for s in samples {
        acc.add(s)?;
    }
    acc.finish()
}

/// Per-trial decompositions `[trial][τ index]`; near-defective snapshots are
/// `None`.
pub type EnsembleRun = Vec<Vec<Option<EnsembleSample>>>;

/// Runs `cfg.trials` independent diffusion paths from `x0` and decomposes
/// the snapshot at every `τ`. Trials run in parallel; the result is in trial
/// order regardless of scheduling.
pub fn sample_ensemble(x0: &ComplexMatrix, cfg: &EnsembleConfig) -> Result<EnsembleRun> {
    cfg.validate()?;
    if x0.n() != cfg.n {
        return Err(Error::invalid(format!("X0 is {}x{}, config says n = {}", x0.n(), x0.n(), cfg.n)));
    }
    (0..cfg.trials).into_par_iter().map(|trial| sample_trial(x0, cfg, trial)).collect()
}

/// One path of [`sample_ensemble`]: the decompositions of trial `trial` at
/// every `τ` of `cfg`.
pub fn sample_trial(x0: &ComplexMatrix, cfg: &EnsembleConfig, trial: usize) -> Result<Vec<Option<EnsembleSample>>> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    evolve_path(x0, &cfg.tau_list, &mut rng)?
        .iter()
        .map(|x| match spectral_decompose(x) {
            Ok(s) => Ok(Some(s)),
            Err(Error::NearDefective { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Field at the `k`-th time of an ensemble run, merged in trial order.
pub fn fields_from_run(run: &EnsembleRun, k: usize, grid: GridSpec) -> Result<FieldGrid> {
    grid.validate()?;
    let first = run
        .iter()
        .filter_map(|t| t.get(k).and_then(|s| s.as_ref()))
        .next()
        .ok_or_else(|| Error::Numerical(format!("no usable sample at time index {k}")))?;
    let mut acc = FieldAccumulator::new(grid, first.n());
    for trial in run {
        match trial.get(k) {
            Some(Some(s)) => acc.add(s)?,
            Some(None) => acc.dropped += 1,
            None => return Err(Error::invalid(format!("time index {k} out of range"))),
        }
    }
    acc.finish()
}

/// One field per `τ` of `cfg`.
pub fn simulate_fields(x0: &ComplexMatrix, cfg: &EnsembleConfig, grid: GridSpec) -> Result<Vec<FieldGrid>> {
    grid.validate()?;
    let run = sample_ensemble(x0, cfg)?;
    (0..cfg.tau_list.len()).map(|k| fields_from_run(&run, k, grid)).collect()
}
