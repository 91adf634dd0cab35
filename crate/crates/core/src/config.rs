//! Run and study configurations.
//!
//! Configs are flat TOML tables. Every key is optional and falls back to the
//! values in [`defaults`]; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ChaosStudyConfig, EpsMode, EpsStudyConfig};
use crate::hartree::HartreeRun;
use crate::onebody::{Grid1D, WaveFunction};
use crate::potentials::{BumpProfile, ScaledBump, TabulatedProfile};

/// Physical and numerical defaults, shared by every command.
pub mod defaults {
    /// Half width of the one-body box `[-L, L)`.
    pub const L: f64 = 20.0;
    /// One-body grid points.
    pub const M: usize = 1024;
    pub const MU: f64 = 1.0;
    /// Width of the Gaussian initial datum.
    pub const SIGMA: f64 = 1.0;
    pub const DT: f64 = 1e-3;
    /// Charge mesh step of the delta solver.
    pub const DELTA: f64 = 1e-3;
    pub const T: f64 = 1.0;
    pub const EPS: f64 = 0.5;
    pub const STRIDE: usize = 100;
    pub const PROFILE: &str = "gaussian";
    /// Spacing of the default sample times `dt_s, 2 dt_s, ..., T`.
    pub const SAMPLE_SPACING: f64 = 0.1;

    /// Many-body runs live on a small box so that `eps >= 4h` holds at the
    /// tensor sizes below.
    pub const MANYBODY_L: f64 = 2.0;
    pub const MANYBODY_SIGMA: f64 = 0.3;
    pub const MANYBODY_N: usize = 2;

    /// Default grid for an `N`-body tensor.
    pub fn manybody_m(n: usize) -> usize {
        if n >= 4 {
            32
        } else {
            64
        }
    }

    /// ε values of the one-body convergence study.
    pub const STUDY_EPS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
    pub const STUDY_L: f64 = 40.0;
    pub const STUDY_M: usize = 8192;
    pub const STUDY_DT: f64 = 2.5e-4;
    pub const STUDY_DELTA: f64 = 5e-4;
    pub const MIN_SLOPE: f64 = 0.25;

    pub const CHAOS_N: [usize; 3] = [2, 3, 4];
    pub const CHAOS_M: usize = 32;
    pub const CHAOS_T: f64 = 0.5;
    pub const CHAOS_DELTA: f64 = 1e-3;
}

/// Reads a config file. Returns the parsed value and the raw text for echoing.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, String)> {
    let raw = std::fs::read_to_string(path)?;
    let value = parse(&raw, &path.display().to_string())?;
    Ok((value, raw))
}

pub fn parse<T: DeserializeOwned>(raw: &str, source_name: &str) -> Result<T> {
    toml::from_str(raw).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        reason: e.message().to_string(),
    })
}

pub(crate) fn default_sample_times(t_final: f64) -> Vec<f64> {
    let n = (t_final / defaults::SAMPLE_SPACING).round() as usize;
    if n == 0 {
        return vec![t_final];
    }
    (1..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

/// Resolves a `profile` value: `"gaussian"` or a two-column CSV path,
/// relative paths being taken from `base`.
pub fn resolve_profile(name: &str, base: Option<&Path>) -> Result<BumpProfile> {
    if name == "gaussian" {
        return Ok(BumpProfile::Gaussian);
    }
    let mut path = PathBuf::from(name);
    if path.is_relative() {
        if let Some(dir) = base {
            path = dir.join(path);
        }
    }
    if !path.exists() {
        return BumpProfile::by_name(name);
    }
    Ok(BumpProfile::Tabulated(TabulatedProfile::from_csv(&path)?))
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {v}")))
    }
}

fn sample_times_within(times: &[f64], t_final: f64) -> Result<()> {
    if times
        .iter()
        .any(|&t| !(t.is_finite() && (0.0..=t_final * (1.0 + 1e-12)).contains(&t)))
    {
        return Err(Error::invalid(
            "sample_times",
            format!("must lie in [0, T = {t_final}]"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HartreeConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub num_points: usize,
    pub eps: f64,
    pub mu: f64,
    pub sigma: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub stride: usize,
    pub profile: String,
}

impl Default for HartreeConfig {
    fn default() -> Self {
        Self {
            half_width: defaults::L,
            num_points: defaults::M,
            eps: defaults::EPS,
            mu: defaults::MU,
            sigma: defaults::SIGMA,
            dt: defaults::DT,
            t_final: defaults::T,
            stride: defaults::STRIDE,
            profile: defaults::PROFILE.into(),
        }
    }
}

impl HartreeConfig {
    pub fn to_run(&self, base: Option<&Path>) -> Result<HartreeRun> {
        let grid = Grid1D::new(self.half_width, self.num_points)?;
        let run = HartreeRun {
            initial: WaveFunction::gaussian(grid, self.sigma)?,
            bump: ScaledBump::new(resolve_profile(&self.profile, base)?, self.eps)?,
            mu: self.mu,
            dt: self.dt,
            t_final: self.t_final,
            stride: self.stride,
        };
        run.validate()?;
        Ok(run)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub num_points: usize,
    pub mu: f64,
    pub sigma: f64,
    /// Charge mesh step.
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Reconstruction times; defaults to every 0.1 up to `T`.
    pub sample_times: Option<Vec<f64>>,
}

impl Default for DeltaConfig {
    fn default() -> Self {
        Self {
            half_width: defaults::L,
            num_points: defaults::M,
            mu: defaults::MU,
            sigma: defaults::SIGMA,
            delta: defaults::DELTA,
            t_final: defaults::T,
            sample_times: None,
        }
    }
}

impl DeltaConfig {
    pub fn validate(&self) -> Result<()> {
        Grid1D::new(self.half_width, self.num_points)?;
        positive("sigma", self.sigma)?;
        positive("delta", self.delta)?;
        non_negative("T", self.t_final)?;
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        sample_times_within(&self.sample_times(), self.t_final)
    }

    pub fn initial(&self) -> Result<WaveFunction> {
        WaveFunction::gaussian(Grid1D::new(self.half_width, self.num_points)?, self.sigma)
    }

    pub fn num_nodes(&self) -> usize {
        (self.t_final / self.delta).round() as usize
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_times
            .clone()
            .unwrap_or_else(|| default_sample_times(self.t_final))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManyBodyConfig {
    #[serde(rename = "N")]
    pub particles: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    /// Defaults to 64 for `N <= 3` and 32 for `N = 4`.
    #[serde(rename = "M")]
    pub num_points: Option<usize>,
    pub eps: f64,
    pub mu: f64,
    pub sigma: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub sample_times: Option<Vec<f64>>,
    pub profile: String,
}

impl Default for ManyBodyConfig {
    fn default() -> Self {
        Self {
            particles: defaults::MANYBODY_N,
            half_width: defaults::MANYBODY_L,
            num_points: None,
            eps: defaults::EPS,
            mu: defaults::MU,
            sigma: defaults::MANYBODY_SIGMA,
            dt: defaults::DT,
            t_final: defaults::T,
            sample_times: None,
            profile: defaults::PROFILE.into(),
        }
    }
}

impl ManyBodyConfig {
    pub fn num_points(&self) -> usize {
        self.num_points
            .unwrap_or_else(|| defaults::manybody_m(self.particles))
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.half_width, self.num_points())
    }

    pub fn bump(&self, base: Option<&Path>) -> Result<ScaledBump> {
        ScaledBump::new(resolve_profile(&self.profile, base)?, self.eps)
    }

    pub fn sample_times(&self) -> Vec<f64> {
        self.sample_times
            .clone()
            .unwrap_or_else(|| default_sample_times(self.t_final))
    }

    /// Everything that can be checked before allocating the tensor.
    pub fn validate(&self, base: Option<&Path>) -> Result<()> {
        let grid = self.grid()?;
        crate::manybody::check_budget(grid.num_points(), self.particles)?;
        positive("sigma", self.sigma)?;
        positive("dt", self.dt)?;
        non_negative("T", self.t_final)?;
        non_negative("mu", self.mu)?;
        let bump = self.bump(base)?;
        bump.ensure_resolved(&grid)?;
        crate::hartree::ensure_stiffness(self.dt, &bump, &grid)?;
        sample_times_within(&self.sample_times(), self.t_final)
    }
}

/// On-disk form of [`EpsStudyConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsStudyFile {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub num_points: usize,
    pub mu: f64,
    pub sigma: f64,
    pub eps: Vec<f64>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub delta: f64,
    pub sample_times: Option<Vec<f64>>,
    pub profile: String,
    /// Fail the study unless distances strictly decrease with ε.
    pub require_monotone: bool,
    /// Fail the study if the fitted log-log slope is below this.
    pub min_slope: Option<f64>,
}

impl Default for EpsStudyFile {
    fn default() -> Self {
        Self {
            half_width: defaults::STUDY_L,
            num_points: defaults::STUDY_M,
            mu: defaults::MU,
            sigma: defaults::SIGMA,
            eps: defaults::STUDY_EPS.to_vec(),
            t_final: defaults::T,
            dt: defaults::STUDY_DT,
            delta: defaults::STUDY_DELTA,
            sample_times: None,
            profile: defaults::PROFILE.into(),
            require_monotone: true,
            min_slope: Some(defaults::MIN_SLOPE),
        }
    }
}

impl EpsStudyFile {
    pub fn resolve(&self, base: Option<&Path>) -> Result<EpsStudyConfig> {
        let grid = Grid1D::new(self.half_width, self.num_points)?;
        let cfg = EpsStudyConfig {
            initial: WaveFunction::gaussian(grid, self.sigma)?,
            profile: resolve_profile(&self.profile, base)?,
            mu: self.mu,
            eps: self.eps.clone(),
            t_final: self.t_final,
            dt: self.dt,
            delta: self.delta,
            sample_times: self
                .sample_times
                .clone()
                .unwrap_or_else(|| default_sample_times(self.t_final)),
            require_monotone: self.require_monotone,
            min_slope: self.min_slope,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// On-disk form of [`ChaosStudyConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChaosStudyFile {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "M")]
    pub num_points: usize,
    pub mu: f64,
    pub sigma: f64,
    /// Fixed bump width; ignored when `eps_mode = "log"`.
    pub eps: f64,
    /// `"fixed"` or `"log"` (ε = (log N)^{-1/2}).
    pub eps_mode: EpsMode,
    #[serde(rename = "N")]
    pub particles: Vec<usize>,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub delta: f64,
    pub sample_times: Option<Vec<f64>>,
    pub profile: String,
    /// Fail the study unless the Hartree leg strictly decreases in `N` at `T`.
    pub require_decreasing: bool,
}

impl Default for ChaosStudyFile {
    fn default() -> Self {
        Self {
            half_width: defaults::MANYBODY_L,
            num_points: defaults::CHAOS_M,
            mu: defaults::MU,
            sigma: defaults::MANYBODY_SIGMA,
            eps: defaults::EPS,
            eps_mode: EpsMode::Fixed,
            particles: defaults::CHAOS_N.to_vec(),
            t_final: defaults::CHAOS_T,
            dt: defaults::DT,
            delta: defaults::CHAOS_DELTA,
            sample_times: None,
            profile: defaults::PROFILE.into(),
            require_decreasing: true,
        }
    }
}

impl ChaosStudyFile {
    pub fn resolve(&self, base: Option<&Path>) -> Result<ChaosStudyConfig> {
        let grid = Grid1D::new(self.half_width, self.num_points)?;
        let initial = WaveFunction::gaussian(grid, self.sigma)?.normalized()?;
        let cfg = ChaosStudyConfig {
            initial,
            profile: resolve_profile(&self.profile, base)?,
            mu: self.mu,
            eps: self.eps,
            eps_mode: self.eps_mode,
            particles: self.particles.clone(),
            t_final: self.t_final,
            dt: self.dt,
            delta: self.delta,
            sample_times: self
                .sample_times
                .clone()
                .unwrap_or_else(|| default_sample_times(self.t_final)),
            require_decreasing: self.require_decreasing,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
