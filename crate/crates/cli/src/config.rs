//! Experiment configuration: a JSON document validated up front, before any
//! computation starts.

use std::path::{Path, PathBuf};

use nhdiff_core::observables::GridSpec;
use nhdiff_core::{Complex64, ComplexMatrix, InitialCondition};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const DEFAULT_TRIALS: usize = 6;
pub const DEFAULT_SOLVE_N: usize = 64;
pub const DEFAULT_ASYMPT_N: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Solve,
    Aecp,
    Kernel,
    Asympt,
    Compare,
}

/// A complex number written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn get(self) -> Complex64 {
        match self {
            Self::Real(x) => Complex64::new(x, 0.0),
            Self::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Serialize for ComplexValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let c = self.get();
        [c.re, c.im].serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    Spiric { a: ComplexValue },
    Jordan { alpha: ComplexValue },
    /// Either a matrix text file (relative paths resolve against the config
    /// file) or inline rows.
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rows: Option<Vec<Vec<ComplexValue>>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    initial: Option<InitialSpec>,
    n: Option<usize>,
    tau_list: Option<Vec<f64>>,
    trials: Option<usize>,
    seed: Option<u64>,
    grid: Option<GridConfig>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    extras: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateExtras {
    #[serde(default = "yes")]
    pub scatter: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    /// The literal initial matrix.
    Literal,
    /// The Jordan shift is replaced by its circulant completion, which has
    /// the same large-`n` limit without the finite-`n` artefacts.
    LargeN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveExtras {
    #[serde(default = "large_n")]
    pub realization: Realization,
    #[serde(default = "yes")]
    pub contour: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    Z,
    R,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AecpExtras {
    #[serde(default = "scan_z")]
    pub scan: ScanAxis,
    /// Scan start: a complex `z` for z-scans, a real `r` for r-scans.
    pub from: Option<ComplexValue>,
    pub to: Option<ComplexValue>,
    #[serde(default = "points_101")]
    pub points: usize,
    /// Fixed `z` of an r-scan.
    #[serde(default = "zero_c")]
    pub z: ComplexValue,
    /// Fixed `r` of a z-scan.
    #[serde(default)]
    pub r: f64,
    #[serde(default = "five")]
    pub residual_points: usize,
    #[serde(default = "step")]
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelExtras {
    #[serde(default = "default_pairs")]
    pub pairs: Vec<[ComplexValue; 2]>,
    #[serde(default = "points_101")]
    pub diagonal_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    GinibreEdge,
    SpiricCollision,
    JordanOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptExtras {
    #[serde(default = "all_profiles")]
    pub families: Vec<ProfileName>,
    #[serde(default = "points_17")]
    pub points: usize,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default)]
    pub t_spiric: f64,
    #[serde(default = "one")]
    pub t_jordan: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Ginibre,
    Spiric,
    Jordan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareExtras {
    #[serde(default = "all_families")]
    pub families: Vec<FamilyName>,
    #[serde(default = "one_c")]
    pub a: ComplexValue,
    #[serde(default = "one_c")]
    pub alpha: ComplexValue,
    #[serde(default = "solve_n")]
    pub solver_n: usize,
    /// Points per axis of the analytic comparison grid.
    #[serde(default = "points_41")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Extras {
    Simulate(SimulateExtras),
    Solve(SolveExtras),
    Aecp(AecpExtras),
    Kernel(KernelExtras),
    Asympt(AsymptExtras),
    Compare(CompareExtras),
}

fn yes() -> bool {
    true
}
fn large_n() -> Realization {
    Realization::LargeN
}
fn scan_z() -> ScanAxis {
    ScanAxis::Z
}
fn points_101() -> usize {
    101
}
fn points_17() -> usize {
    17
}
fn points_41() -> usize {
    41
}
fn five() -> usize {
    5
}
fn step() -> f64 {
    1e-3
}
fn one() -> f64 {
    1.0
}
fn zero_c() -> ComplexValue {
    ComplexValue::Real(0.0)
}
fn one_c() -> ComplexValue {
    ComplexValue::Real(1.0)
}
fn solve_n() -> usize {
    DEFAULT_SOLVE_N
}
fn default_pairs() -> Vec<[ComplexValue; 2]> {
    vec![
        [ComplexValue::Real(0.0), ComplexValue::Real(0.0)],
        [ComplexValue::Pair([0.3, 0.1]), ComplexValue::Pair([-0.2, 0.4])],
        [ComplexValue::Pair([0.5, -0.5]), ComplexValue::Pair([0.6, 0.2])],
    ]
}
fn all_profiles() -> Vec<ProfileName> {
    vec![ProfileName::GinibreEdge, ProfileName::SpiricCollision, ProfileName::JordanOrigin]
}
fn all_families() -> Vec<FamilyName> {
    vec![FamilyName::Ginibre, FamilyName::Spiric, FamilyName::Jordan]
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub initial: Option<InitialSpec>,
    pub n: Option<usize>,
    pub tau_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub grid: Option<GridConfig>,
    pub output_dir: PathBuf,
    pub extras: Extras,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{field}`: {msg}"))
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("missing required field `{field}`"))
}

fn parse_extras<T: DeserializeOwned>(map: &Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(map.clone())).map_err(|e| field_err("extras", e))
}

fn check_tau_list(taus: &[f64]) -> Result<(), CliError> {
    nhdiff_core::mc::validate_tau_list(taus).map_err(|e| field_err("tau_list", e))
}

/// Parses and validates a config document. `base_dir` anchors relative
/// paths in the document.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config JSON: {e}")))?;
    let cmd = raw.command;
    let require_initial = || raw.initial.clone().ok_or_else(|| missing("initial"));
    let require_n = || raw.n.ok_or_else(|| missing("n"));
    let require_taus = || raw.tau_list.clone().ok_or_else(|| missing("tau_list"));
    let (initial, n, tau_list, extras) = match cmd {
        Command::Simulate => (Some(require_initial()?), Some(require_n()?), require_taus()?, Extras::Simulate(parse_extras(&raw.extras)?)),
        Command::Solve => (
            Some(require_initial()?),
            Some(raw.n.unwrap_or(DEFAULT_SOLVE_N)),
            require_taus()?,
            Extras::Solve(parse_extras(&raw.extras)?),
        ),
        Command::Aecp => (Some(require_initial()?), Some(require_n()?), require_taus()?, Extras::Aecp(parse_extras(&raw.extras)?)),
        Command::Kernel => (None, Some(require_n()?), raw.tau_list.clone().unwrap_or_else(|| vec![1.0]), Extras::Kernel(parse_extras(&raw.extras)?)),
        Command::Asympt => (
            None,
            Some(raw.n.unwrap_or(DEFAULT_ASYMPT_N)),
            raw.tau_list.clone().unwrap_or_else(|| vec![1.0]),
            Extras::Asympt(parse_extras(&raw.extras)?),
        ),
        Command::Compare => (None, raw.n, raw.tau_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 1.5]), Extras::Compare(parse_extras(&raw.extras)?)),
    };
    if matches!(cmd, Command::Kernel | Command::Asympt | Command::Compare) && raw.initial.is_some() {
        return Err(field_err("initial", format!("not used by the {cmd:?} command")));
    }
    check_tau_list(&tau_list)?;
    if let Some(n) = n {
        if n == 0 {
            return Err(field_err("n", "must be >= 1"));
        }
    }
    let trials = raw.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(field_err("trials", "must be >= 1"));
    }
    if let Some(g) = raw.grid {
        GridSpec::new(g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny).map_err(|e| field_err("grid", e))?;
    }
    let cfg = ExperimentConfig {
        command: cmd,
        initial,
        n,
        tau_list,
        trials,
        seed: raw.seed.unwrap_or(0),
        grid: raw.grid,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        extras,
        base_dir: base_dir.to_path_buf(),
    };
    cfg.validate_extras()?;
    if let Some(init) = &cfg.initial {
        cfg.build_initial(init)?;
    }
    Ok(cfg)
}

impl ExperimentConfig {
    fn validate_extras(&self) -> Result<(), CliError> {
        match &self.extras {
            Extras::Aecp(e) => {
                if e.points < 2 {
                    return Err(field_err("extras.points", "need at least 2 points"));
                }
                if !(e.h > 0.0) {
                    return Err(field_err("extras.h", "must be > 0"));
                }
                if !(e.r >= 0.0) {
                    return Err(field_err("extras.r", "must be >= 0"));
                }
                if e.scan == ScanAxis::R {
                    for (name, v) in [("extras.from", e.from), ("extras.to", e.to)] {
                        if let Some(v) = v {
                            let c = v.get();
                            if c.im != 0.0 || c.re < 0.0 {
                                return Err(field_err(name, "r-scan bounds must be real and >= 0"));
                            }
                        }
                    }
                }
            }
            Extras::Kernel(e) if e.diagonal_points < 2 => return Err(field_err("extras.diagonal_points", "need at least 2")),
            Extras::Asympt(e) => {
                if e.points < 2 {
                    return Err(field_err("extras.points", "need at least 2"));
                }
                if !(e.tau > 0.0) {
                    return Err(field_err("extras.tau", "must be > 0"));
                }
                if !(e.t_jordan > 0.0) {
                    return Err(field_err("extras.t_jordan", "must be > 0"));
                }
            }
            Extras::Compare(e) => {
                if e.families.is_empty() {
                    return Err(field_err("extras.families", "must not be empty"));
                }
                if e.solver_n < 2 || e.solver_n % 2 == 1 {
                    return Err(field_err("extras.solver_n", "must be even and >= 2"));
                }
                if e.points < 2 {
                    return Err(field_err("extras.points", "need at least 2"));
                }
                if e.a.get().norm() == 0.0 {
                    return Err(field_err("extras.a", "must be non-zero"));
                }
                if e.families.contains(&FamilyName::Spiric) && self.n.is_some_and(|n| n % 2 == 1) {
                    return Err(field_err("n", "Monte Carlo for the spiric family needs even n"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(0)
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_list.last().copied().unwrap_or(1.0)
    }

    /// The configured grid, or the default `±1.6√τ_max` grid.
    pub fn grid_spec(&self) -> GridSpec {
        match self.grid {
            Some(g) => GridSpec { x_min: g.x_min, x_max: g.x_max, y_min: g.y_min, y_max: g.y_max, nx: g.nx, ny: g.ny },
            None => GridSpec::default_for(self.tau_max()),
        }
    }

    pub fn initial_condition(&self, init: &InitialSpec) -> Result<InitialCondition, CliError> {
        Ok(match init {
            InitialSpec::Zero => InitialCondition::Zero,
            InitialSpec::Spiric { a } => InitialCondition::Spiric(a.get()),
            InitialSpec::Jordan { alpha } => InitialCondition::Jordan(alpha.get()),
            InitialSpec::Explicit { path, rows } => {
                let m = match (path, rows) {
                    (Some(p), None) => {
                        let full = if p.is_absolute() { p.clone() } else { self.base_dir.join(p) };
                        let text = std::fs::read_to_string(&full)
                            .map_err(|e| field_err("initial.path", format!("{}: {e}", full.display())))?;
                        ComplexMatrix::parse_text(&text).map_err(|e| field_err("initial.path", e))?
                    }
                    (None, Some(rows)) => {
                        let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|v| v.get()).collect()).collect();
                        ComplexMatrix::from_rows(&rows).map_err(|e| field_err("initial.rows", e))?
                    }
                    _ => return Err(field_err("initial", "explicit matrices need exactly one of `path` or `rows`")),
                };
                InitialCondition::Explicit(m)
            }
        })
    }

    pub fn build_initial(&self, init: &InitialSpec) -> Result<ComplexMatrix, CliError> {
        let cond = self.initial_condition(init)?;
        nhdiff_core::build_initial(&cond, self.n()).map_err(|e| field_err("initial", e))
    }
}
