//! The JSON run configuration.
//!
//! ```json
//! {
//!   "system":  { "masses": [1.0], "kappa": [[1.0]], "star_index": 0 },
//!   "bath":    { "kind": "uniform-flat", "n_modes": 64, "nu_max": 2.0, "coupling_scale": 0.1 },
//!   "initial": { "x0": [1.0], "p0": [0.0] },
//!   "run":     { "mode": "reference", "t_final": 50.0, "sample_dt": 0.05 }
//! }
//! ```
//!
//! Unknown and duplicate keys are rejected. Errors carry the path of the
//! offending field.

use std::path::{Path, PathBuf};

use clbath::bath::{self, SpectralModel};
use clbath::dynamics::{initial_state, PhaseState};
use clbath::model::{BathSpec, CompositeModel, SystemSpec};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ModelContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub bath: BathConfig,
    pub initial: InitialConfig,
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub masses: Vec<f64>,
    pub kappa: Vec<Vec<f64>>,
    /// Zero-based index of the bath-coupled mass.
    pub star_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BathConfig {
    UniformFlat {
        n_modes: usize,
        nu_max: f64,
        coupling_scale: f64,
    },
    BandLimited {
        n_modes: usize,
        nu_max: f64,
        band: [f64; 2],
        coupling_scale: f64,
    },
    Explicit {
        frequencies: Vec<f64>,
        couplings: Vec<f64>,
    },
    /// Two-column `nu,g` CSV, relative to the config file.
    ExplicitCsv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x0: Vec<f64>,
    pub p0: Vec<f64>,
    /// Bath positions; default is equilibrium with the displaced star mass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    /// Bath momenta; default zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Reference,
    Exact,
    Walk,
    Diagnose,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Reference => "reference",
            Mode::Exact => "exact",
            Mode::Walk => "walk",
            Mode::Diagnose => "diagnose",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    NormalModes,
    Verlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    pub t_final: f64,
    pub sample_dt: f64,
    #[serde(default = "default_eps")]
    pub target_eps: f64,
    #[serde(default = "default_phase_bits")]
    pub phase_bits: u32,
    /// Walk segments per sample interval; default `⌈‖abs(Ĥ)‖·Δt⌉`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    /// Emulated tomography of the final primary amplitudes (exact and walk
    /// modes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default = "default_verlet_step")]
    pub verlet_step: f64,
    #[serde(default = "default_threshold")]
    pub recurrence_threshold: f64,
}

fn default_eps() -> f64 {
    1e-2
}
fn default_phase_bits() -> u32 {
    8
}
fn default_verlet_step() -> f64 {
    1e-3
}
fn default_threshold() -> f64 {
    clbath::diagnostics::DEFAULT_RECURRENCE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path of a scalar field, e.g. `bath.coupling_scale` or
    /// `system.masses[0]`.
    pub param: String,
    pub values: Vec<f64>,
    /// Mode run at every point.
    #[serde(default = "default_point_mode")]
    pub point_mode: Mode,
}

fn default_point_mode() -> Mode {
    Mode::Reference
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_trajectory")]
    pub trajectory: String,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_manifest")]
    pub manifest: String,
    #[serde(default)]
    pub emit_bath: bool,
}

fn default_trajectory() -> String {
    "trajectory.csv".into()
}
fn default_report() -> String {
    "report.json".into()
}
fn default_manifest() -> String {
    "manifest.json".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            trajectory: default_trajectory(),
            report: default_report(),
            manifest: default_manifest(),
            emit_bath: false,
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn from_value(value: serde_json::Value) -> Result<RunConfig> {
    let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a configuration file; a relative bath CSV path is resolved against
/// the file's directory.
pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let BathConfig::ExplicitCsv { path: csv } = &mut cfg.bath {
        if csv.is_relative() {
            if let Some(dir) = path.parent() {
                *csv = dir.join(&*csv);
            }
        }
    }
    Ok(cfg)
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Checks the run parameters that no model constructor sees.
    pub fn validate(&self) -> Result<()> {
        let r = &self.run;
        positive("run.t_final", r.t_final)?;
        positive("run.sample_dt", r.sample_dt)?;
        positive("run.verlet_step", r.verlet_step)?;
        if !(r.target_eps > 0.0 && r.target_eps < 1.0) {
            return Err(CliError::config("run.target_eps", format!("must lie in (0, 1), got {}", r.target_eps)));
        }
        if r.phase_bits == 0 || r.phase_bits > clbath::qwalk::qpe::MAX_PHASE_BITS {
            return Err(CliError::config(
                "run.phase_bits",
                format!("must lie in 1..={}", clbath::qwalk::qpe::MAX_PHASE_BITS),
            ));
        }
        if r.repetitions == Some(0) {
            return Err(CliError::config("run.repetitions", "must be at least 1"));
        }
        if r.shots == Some(0) {
            return Err(CliError::config("run.shots", "must be at least 1"));
        }
        if !(r.recurrence_threshold > 0.0 && r.recurrence_threshold <= 1.0) {
            return Err(CliError::config("run.recurrence_threshold", "must lie in (0, 1]"));
        }
        if r.t_final / r.sample_dt > 1e7 {
            return Err(CliError::config("run.sample_dt", "more than 10^7 samples requested"));
        }
        let d = self.system.masses.len();
        if self.initial.x0.len() != d {
            return Err(CliError::config("initial.x0", format!("expected {d} entries, got {}", self.initial.x0.len())));
        }
        if self.initial.p0.len() != d {
            return Err(CliError::config("initial.p0", format!("expected {d} entries, got {}", self.initial.p0.len())));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(CliError::config("sweep.values", "at least one value is required"));
            }
            if s.point_mode == Mode::Sweep {
                return Err(CliError::config("sweep.point_mode", "a sweep point cannot itself be a sweep"));
            }
        }
        Ok(())
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let d = self.system.masses.len();
        for (i, row) in self.system.kappa.iter().enumerate() {
            if row.len() != d {
                return Err(CliError::config(
                    format!("system.kappa[{i}]"),
                    format!("expected {d} entries, got {}", row.len()),
                ));
            }
        }
        if self.system.kappa.len() != d {
            return Err(CliError::config(
                "system.kappa",
                format!("expected {d} rows, got {}", self.system.kappa.len()),
            ));
        }
        let kappa = DMatrix::from_fn(d, d, |i, j| self.system.kappa[i][j]);
        SystemSpec::new(self.system.masses.clone(), kappa, self.system.star_index).context("system")
    }

    pub fn bath_spec(&self) -> Result<BathSpec> {
        match &self.bath {
            BathConfig::UniformFlat { n_modes, nu_max, coupling_scale } => bath::generate(
                &SpectralModel::UniformFlat { nu_max: *nu_max, coupling_scale: *coupling_scale },
                *n_modes,
            ),
            BathConfig::BandLimited { n_modes, nu_max, band, coupling_scale } => bath::generate(
                &SpectralModel::BandLimited {
                    nu_max: *nu_max,
                    band: (band[0], band[1]),
                    coupling_scale: *coupling_scale,
                },
                *n_modes,
            ),
            BathConfig::Explicit { frequencies, couplings } => bath::generate(
                &SpectralModel::Explicit { frequencies: frequencies.clone(), couplings: couplings.clone() },
                frequencies.len(),
            ),
            BathConfig::ExplicitCsv { path } => {
                let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
                bath::read_explicit_csv(file)
            }
        }
        .context("bath")
    }

    pub fn model(&self) -> Result<CompositeModel> {
        CompositeModel::new(self.system_spec()?, self.bath_spec()?).context("system.kappa")
    }

    pub fn initial_state(&self, model: &CompositeModel) -> Result<PhaseState> {
        let mut s = initial_state(model, &self.initial.x0, &self.initial.p0).context("initial")?;
        let n = model.n_modes();
        for (name, given, slot) in
            [("initial.y0", &self.initial.y0, &mut s.y), ("initial.k0", &self.initial.k0, &mut s.k)]
        {
            if let Some(v) = given {
                if v.len() != n {
                    return Err(CliError::config(name, format!("expected {n} entries, got {}", v.len())));
                }
                *slot = DVector::from_column_slice(v);
            }
        }
        Ok(s)
    }

    /// Sample times `k·Δt` up to and including `t_final`.
    pub fn sample_times(&self) -> Vec<f64> {
        let dt = self.run.sample_dt;
        let n = (self.run.t_final / dt * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|k| k as f64 * dt).collect()
    }
}
