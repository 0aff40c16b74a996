//! Run configuration, read from TOML with dotted sections:
//!
//! ```toml
//! scenario = "smalldata"
//! seed = 7
//! grid.n = 128
//! grid.length = "16pi"
//! params.n_fried = 16
//! data.recipe = "random-smooth"
//! data.amplitude = 1e-3
//! step.dt = 0.05
//! step.t_end = 10.0
//! ```
//!
//! Every field has a default; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swlab_core::spectral_core::{build_grid, Grid};
use swlab_core::swe_model::SweParams;
use swlab_core::time_integrator::{Probes, StepControl};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    LinearSpectroscopy,
    Coercivity,
    Smalldata,
    FriedrichsConvergence,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::LinearSpectroscopy => "linear-spectroscopy",
            Scenario::Coercivity => "coercivity",
            Scenario::Smalldata => "smalldata",
            Scenario::FriedrichsConvergence => "friedrichs-convergence",
        };
        f.write_str(s)
    }
}

/// A period length given as a number or as `"<x>pi"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length(pub f64);

impl Serialize for Length {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Length, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Length(x)),
            Raw::Text(t) => parse_pi(&t).map(Length).ok_or_else(|| de::Error::custom(format!("cannot read length {t:?}"))),
        }
    }
}

fn parse_pi(t: &str) -> Option<f64> {
    let t = t.trim();
    let head = t.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let x = if head.is_empty() { 1.0 } else { head.parse::<f64>().ok()? };
    Some(x * std::f64::consts::PI)
}

/// Friedrichs index: a positive integer or `"off"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Friedrichs(pub Option<u32>);

impl Serialize for Friedrichs {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(n) => s.serialize_u32(n),
            None => s.serialize_str("off"),
        }
    }
}

impl<'de> Deserialize<'de> for Friedrichs {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Friedrichs, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) if n >= 1 && n <= u32::MAX as i64 => Ok(Friedrichs(Some(n as u32))),
            Raw::Num(n) => Err(de::Error::custom(format!("Friedrichs index must be a positive integer, got {n}"))),
            Raw::Text(t) if t == "off" => Ok(Friedrichs(None)),
            Raw::Text(t) => Err(de::Error::custom(format!("Friedrichs index must be an integer or \"off\", got {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub length: Length,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 128,
            length: Length(16.0 * std::f64::consts::PI),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub hbar0: f64,
    pub mu: f64,
    pub f_cor: f64,
    pub grav: f64,
    pub beta: f64,
    pub n_fried: Friedrichs,
    pub nonlinear: bool,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig {
            hbar0: 1.0,
            mu: 1.0,
            f_cor: 1.0,
            grav: 1.0,
            beta: 1.0,
            n_fried: Friedrichs(None),
            nonlinear: true,
        }
    }
}

impl ParamsConfig {
    pub fn to_params(&self) -> SweParams {
        SweParams {
            hbar0: self.hbar0,
            mu: self.mu,
            f_cor: self.f_cor,
            grav: self.grav,
            beta: self.beta,
            n_fried: self.n_fried.0,
            nonlinear: self.nonlinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// `h` and `u` with spectrum `(1 + |xi|^2)^(-slope/2)`.
    RandomSmooth,
    /// Random `h`, `c`, `d` on the annulus of `data.band`.
    SingleBand,
    /// Random `h` and a curl-free velocity.
    GradientOnly,
    /// Random `h` and a divergence-free velocity.
    DivergenceFreeOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub recipe: Recipe,
    /// `L^2` norm of `h` and of `u`.
    pub amplitude: f64,
    pub slope: f64,
    pub band: i32,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            recipe: Recipe::RandomSmooth,
            amplitude: 1e-3,
            slope: 2.0,
            band: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepConfig {
    pub dt: f64,
    pub t_end: f64,
    pub safety: f64,
    pub max_steps: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            dt: 0.05,
            t_end: 10.0,
            safety: 0.5,
            max_steps: 1_000_000,
        }
    }
}

impl StepConfig {
    pub fn control(&self) -> StepControl {
        StepControl {
            dt: self.dt,
            t_end: self.t_end,
            safety: self.safety,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Snapshot every this many steps (0: endpoints only).
    pub every: usize,
    /// Explicit snapshot times; overrides `every` when nonempty.
    pub times: Vec<f64>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { every: 20, times: Vec::new() }
    }
}

impl ProbeConfig {
    pub fn probes(&self) -> Probes {
        if !self.times.is_empty() {
            Probes::Times(self.times.clone())
        } else if self.every > 0 {
            Probes::Every(self.every)
        } else {
            Probes::Endpoints
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub s: f64,
    pub eps: f64,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { s: 1.0, eps: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectroscopyConfig {
    pub bands: Vec<i32>,
    /// `alpha_k^2` is followed until it has decayed by `exp(-decay)`.
    pub decay: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl Default for SpectroscopyConfig {
    fn default() -> Self {
        SpectroscopyConfig {
            bands: (-3..=3).collect(),
            decay: 30.0,
            samples: 400,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoercivityConfig {
    pub trials: usize,
    /// Empty: every band of the grid.
    pub bands: Vec<i32>,
}

impl Default for CoercivityConfig {
    fn default() -> Self {
        CoercivityConfig { trials: 100, bands: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmalldataConfig {
    /// Bound on `E(t) / E(0)`.
    pub max_ratio: f64,
    pub mass_tolerance: f64,
    pub dump_states: bool,
}

impl Default for SmalldataConfig {
    fn default() -> Self {
        SmalldataConfig {
            max_ratio: 10.0,
            mass_tolerance: 1e-12,
            dump_states: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub n_list: Vec<u32>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { n_list: vec![4, 8, 16, 32] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output: PathBuf,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub data: DataConfig,
    pub step: StepConfig,
    pub probes: ProbeConfig,
    pub norms: NormConfig,
    pub spectroscopy: SpectroscopyConfig,
    pub coercivity: CoercivityConfig,
    pub smalldata: SmalldataConfig,
    pub study: StudyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Smalldata,
            seed: 1,
            output: PathBuf::from("runs/default"),
            grid: GridConfig::default(),
            params: ParamsConfig::default(),
            data: DataConfig::default(),
            step: StepConfig::default(),
            probes: ProbeConfig::default(),
            norms: NormConfig::default(),
            spectroscopy: SpectroscopyConfig::default(),
            coercivity: CoercivityConfig::default(),
            smalldata: SmalldataConfig::default(),
            study: StudyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical TOML form with the output directory blanked.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = PathBuf::new();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        build_grid(self.grid.n, self.grid.length.0).map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn params(&self) -> SweParams {
        self.params.to_params()
    }

    /// Checks every referenced field before any work is done.
    pub fn validate(&self) -> Result<Grid, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let grid = self.grid()?;
        self.params().validate().map_err(|e| CliError::Config(format!("params: {e}")))?;
        self.step.control().validate().map_err(|e| CliError::Config(format!("step: {e}")))?;
        if !(self.data.amplitude >= 0.0 && self.data.amplitude.is_finite()) {
            return bad(format!("data.amplitude must be nonnegative, got {}", self.data.amplitude));
        }
        if !self.data.slope.is_finite() {
            return bad("data.slope must be finite".into());
        }
        if self.data.recipe == Recipe::SingleBand && grid.band(self.data.band).is_none() {
            return bad(format!("data.band {} outside the grid's bands {}..={}", self.data.band, grid.k_min(), grid.k_max()));
        }
        if self.probes.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("probes.times must be nonnegative".into());
        }
        if !(self.norms.eps > 0.0 && self.norms.eps < 1.0) {
            return bad(format!("norms.eps must lie in (0, 1), got {}", self.norms.eps));
        }
        match self.scenario {
            Scenario::LinearSpectroscopy => {
                if let Some(k) = self.spectroscopy.bands.iter().find(|k| grid.band(**k).is_none()) {
                    return bad(format!("spectroscopy band {k} is not resolved on this grid"));
                }
                if self.spectroscopy.samples < 10 || !(self.spectroscopy.decay > 0.0) {
                    return bad("spectroscopy needs samples >= 10 and a positive decay".into());
                }
            }
            Scenario::Coercivity => {
                if let Some(k) = self.coercivity.bands.iter().find(|k| grid.band(**k).is_none()) {
                    return bad(format!("coercivity band {k} is not resolved on this grid"));
                }
            }
            Scenario::FriedrichsConvergence => validate_n_list(&self.study.n_list)?,
            Scenario::Smalldata => {}
        }
        Ok(grid)
    }
}

pub fn validate_n_list(list: &[u32]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::Config("the Friedrichs list is empty".into()));
    }
    if list.contains(&0) {
        return Err(CliError::Config("Friedrichs indices must be positive".into()));
    }
    if list.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Config(format!("Friedrichs list must be ascending, got {list:?}")));
    }
    Ok(())
}
