//! Run orchestration for every mode.

use std::path::{Path, PathBuf};

use clbath::diagnostics::DiagnosticsReport;
use clbath::dynamics::{evolve_verlet, system_energy, total_energy, NormalModes, PhaseState};
use clbath::exec::ExecPolicy;
use clbath::hamsim::SpectralData;
use clbath::model::CompositeModel;
use clbath::qstate::{decode, direct_readout, encode, tomography_sample, EncodedState};
use clbath::qwalk::simulate::{compare, segment_count};
use clbath::qwalk::space::WALK_DIMENSION_CAP;
use clbath::qwalk::{resource_estimate, PhaseConfig, WalkSimulator, WalkSpace, DEFAULT_RESOURCE_CAP};
use serde_json::{json, Value};

use crate::config::{Integrator, Mode, RunConfig};
use crate::error::{ModelContext, Result};
use crate::output::{json_bytes, sha256_hex, trajectory_csv, write_file, Sample};
use crate::sweep;

/// Command-line overrides and execution settings.
#[derive(Debug, Clone)]
pub struct Options {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub emit_bath: bool,
    pub resource_cap: usize,
    pub policy: ExecPolicy,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            out_dir: PathBuf::from("."),
            seed: None,
            emit_bath: false,
            resource_cap: DEFAULT_RESOURCE_CAP,
            policy: ExecPolicy::default(),
        }
    }
}

/// Named artifact contents, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    /// Headline numbers of the run (also embedded in the report).
    pub summary: Value,
}

impl Artifacts {
    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        for (name, bytes) in &self.files {
            write_file(dir, name, bytes)?;
        }
        Ok(())
    }
}

/// The configuration after command-line overrides; this is what gets hashed.
pub fn effective_config(cfg: &RunConfig, opts: &Options) -> RunConfig {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.run.seed = seed;
    }
    cfg.output.emit_bath |= opts.emit_bath;
    cfg
}

pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(cfg)?))
}

/// Computes and writes all artifacts of `cfg` into `opts.out_dir`.
pub fn run(cfg: &RunConfig, opts: &Options) -> Result<Artifacts> {
    let artifacts = compute(cfg, opts)?;
    artifacts.write(&opts.out_dir)?;
    Ok(artifacts)
}

/// Computes all artifacts without touching the file system (sweep points
/// carry their directory in the file names).
pub fn compute(cfg: &RunConfig, opts: &Options) -> Result<Artifacts> {
    let cfg = effective_config(cfg, opts);
    if cfg.run.mode == Mode::Sweep {
        return sweep::compute(&cfg, opts);
    }
    let model = cfg.model()?;
    let s0 = cfg.initial_state(&model)?;
    let times = cfg.sample_times();
    let (samples, report, achieved) = match cfg.run.mode {
        Mode::Reference => reference(&cfg, &model, &s0, &times, opts)?,
        Mode::Exact => exact(&cfg, &model, &s0, &times, opts)?,
        Mode::Walk => walk(&cfg, &model, &s0, &times, opts)?,
        Mode::Diagnose => diagnose(&cfg, &model, &s0, &times, opts)?,
        Mode::Sweep => unreachable!("handled above"),
    };
    let mut files = Vec::new();
    if let Some(samples) = samples {
        let csv = trajectory_csv(&samples, model.d(), model.n_modes(), cfg.output.emit_bath)?;
        files.push((cfg.output.trajectory.clone(), csv));
    }
    let report = json!({
        "mode": cfg.run.mode.name(),
        "d": model.d(),
        "n_modes": model.n_modes(),
        "dimension": model.dim(),
        "t_final": cfg.run.t_final,
        "samples": times.len(),
        "initial_energy": total_energy(&model, &s0),
        "result": report,
    });
    files.push((cfg.output.report.clone(), json_bytes(&report)?));
    let manifest = manifest(&cfg, opts, &files, &achieved)?;
    files.push((cfg.output.manifest.clone(), json_bytes(&manifest)?));
    Ok(Artifacts { files, summary: achieved })
}

pub(crate) fn manifest(
    cfg: &RunConfig,
    opts: &Options,
    files: &[(String, Vec<u8>)],
    achieved: &Value,
) -> Result<Value> {
    let artifacts: serde_json::Map<String, Value> =
        files.iter().map(|(n, b)| (n.clone(), Value::String(sha256_hex(b)))).collect();
    Ok(json!({
        "tool": "clbath",
        "cli_version": env!("CARGO_PKG_VERSION"),
        "core_version": clbath::VERSION,
        "config_sha256": config_hash(cfg)?,
        "mode": cfg.run.mode.name(),
        "seed": cfg.run.seed,
        "resource_cap": opts.resource_cap,
        "artifacts": artifacts,
        "achieved": achieved,
    }))
}

type ModeOutput = (Option<Vec<Sample>>, Value, Value);

fn sample_of(model: &CompositeModel, state: PhaseState) -> Sample {
    Sample { system_energy: system_energy(model, &state.x, &state.p), total_energy: total_energy(model, &state), state }
}

fn max_energy_drift(samples: &[Sample], e0: f64) -> f64 {
    samples.iter().map(|s| ((s.total_energy - e0) / e0).abs()).fold(0.0, f64::max)
}

fn reference(
    cfg: &RunConfig,
    model: &CompositeModel,
    s0: &PhaseState,
    times: &[f64],
    opts: &Options,
) -> Result<ModeOutput> {
    let states = match cfg.run.integrator {
        Integrator::NormalModes => NormalModes::new(model).context("normal modes")?.trajectory(s0, times, opts.policy),
        Integrator::Verlet => {
            let mut out = Vec::with_capacity(times.len());
            let mut s = s0.clone();
            for &t in times {
                s = evolve_verlet(model, &s, t - s.t, cfg.run.verlet_step).context("run.verlet_step")?;
                s.t = t;
                out.push(s.clone());
            }
            out
        }
    };
    let samples: Vec<Sample> = states.into_iter().map(|s| sample_of(model, s)).collect();
    let drift = max_energy_drift(&samples, total_energy(model, s0));
    let integrator = match cfg.run.integrator {
        Integrator::NormalModes => "normal-modes",
        Integrator::Verlet => "verlet",
    };
    let achieved = json!({ "max_relative_energy_drift": drift });
    let report = json!({ "integrator": integrator, "max_relative_energy_drift": drift });
    Ok((Some(samples), report, achieved))
}

fn tomography_report(cfg: &RunConfig, psi: &EncodedState) -> Result<Value> {
    let Some(shots) = cfg.run.shots else { return Ok(Value::Null) };
    let est = tomography_sample(psi, shots, cfg.run.seed).context("run.shots")?;
    let truth = direct_readout(psi).amplitudes;
    let aligned = est.aligned_with(&truth);
    let max_error = aligned.iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(
        json!({ "estimate": est, "aligned_amplitudes": aligned, "direct_amplitudes": truth, "max_abs_error": max_error }),
    )
}

fn exact(
    cfg: &RunConfig,
    model: &CompositeModel,
    s0: &PhaseState,
    times: &[f64],
    opts: &Options,
) -> Result<ModeOutput> {
    let sd = SpectralData::for_model(model).context("exact propagation")?;
    let psi0 = encode(model, s0).context("initial")?;
    let states: Vec<EncodedState> = opts.policy.map_range(times.len(), |i| EncodedState {
        amplitudes: sd.apply(&psi0.amplitudes, times[i] - psi0.t),
        t: times[i],
        ..psi0.clone()
    });
    let mut samples = Vec::with_capacity(states.len());
    let (mut norm_defect, mut imag): (f64, f64) = (0.0, 0.0);
    for psi in &states {
        norm_defect = norm_defect.max((psi.norm() - 1.0).abs());
        imag = imag.max(psi.imaginary_residue());
        samples.push(sample_of(model, decode(model, psi).context("decode")?));
    }
    let drift = max_energy_drift(&samples, psi0.e0);
    let tomography = tomography_report(cfg, states.last().expect("at least one sample"))?;
    let achieved = json!({
        "max_norm_defect": norm_defect,
        "max_imaginary_residue": imag,
        "max_relative_energy_drift": drift,
    });
    let report = json!({
        "hamiltonian_norm": sd.norm(),
        "max_norm_defect": norm_defect,
        "max_imaginary_residue": imag,
        "max_relative_energy_drift": drift,
        "tomography": tomography,
    });
    Ok((Some(samples), report, achieved))
}

fn walk(cfg: &RunConfig, model: &CompositeModel, s0: &PhaseState, times: &[f64], opts: &Options) -> Result<ModeOutput> {
    let pc = PhaseConfig::new(cfg.run.phase_bits, cfg.run.target_eps, cfg.run.repetitions).context("run")?;
    let sim = WalkSimulator::new(model, pc.phase_bits, opts.resource_cap, opts.policy).context("walk")?;
    let sd = SpectralData::for_model(model).context("exact propagation")?;
    let psi0 = encode(model, s0).context("initial")?;
    let mut psi = psi0.clone();
    let mut total_segments = 0;
    let mut samples = Vec::with_capacity(times.len());
    let (mut max_decoded, mut min_fidelity): (f64, f64) = (0.0, 1.0);
    let mut last_exact = psi0.clone();
    for &t in times {
        let dt = t - psi.t;
        if dt > 0.0 {
            let segments = segment_count(sim.space().hnorm(), dt, pc.repetitions);
            psi = sim.evolve(&psi, dt, segments);
            psi.t = t;
            total_segments += segments;
        }
        let exact = EncodedState { amplitudes: sd.apply(&psi0.amplitudes, t - psi0.t), t, ..psi0.clone() };
        let a = decode(model, &psi).context("decode")?;
        let b = decode(model, &exact).context("decode")?;
        max_decoded = max_decoded.max((&a.x - &b.x).amax().max((&a.p - &b.p).amax()));
        min_fidelity = min_fidelity.min(exact.fidelity(&psi));
        samples.push(sample_of(model, a));
        last_exact = exact;
    }
    let t_total = psi.t - psi0.t;
    let final_report = compare(model, &psi, &last_exact, &sim, &pc, total_segments.max(1), t_total).context("walk")?;
    let resources =
        resource_estimate(model, cfg.run.t_final, pc.target_eps, Some(pc.phase_bits)).context("resources")?;
    let tomography = tomography_report(cfg, &psi)?;
    let achieved = json!({
        "final_fidelity": final_report.fidelity,
        "achieved_eps": final_report.achieved_eps,
        "target_eps": pc.target_eps,
        "best_effort": !final_report.met_target,
        "max_decoded_error": max_decoded,
        "min_fidelity": min_fidelity,
    });
    let report = json!({
        "final": final_report,
        "max_decoded_error": max_decoded,
        "min_fidelity": min_fidelity,
        "best_effort": !final_report.met_target,
        "resources": resources,
        "tomography": tomography,
    });
    Ok((Some(samples), report, achieved))
}

fn diagnose(
    cfg: &RunConfig,
    model: &CompositeModel,
    s0: &PhaseState,
    times: &[f64],
    opts: &Options,
) -> Result<ModeOutput> {
    let modes = NormalModes::new(model).context("normal modes")?;
    let traj = modes.primary_trajectory(s0, times, opts.policy);
    let star = model.star();
    let x_star: Vec<f64> = traj.iter().map(|(x, _)| x[star]).collect();
    let energy: Vec<f64> = traj.iter().map(|(x, p)| system_energy(model, x, p)).collect();
    let report = DiagnosticsReport::structural(model).context("diagnostics")?.with_trajectory(
        times,
        &x_star,
        &energy,
        cfg.run.recurrence_threshold,
    );
    let resources =
        resource_estimate(model, cfg.run.t_final, cfg.run.target_eps, Some(cfg.run.phase_bits)).context("resources")?;
    let walk_checks = if model.dim() <= WALK_DIMENSION_CAP.min(32) {
        match model.assemble_hamiltonian().and_then(|h| WalkSpace::new(&h)) {
            Ok(space) => json!(space.checks()),
            Err(e) => json!({ "skipped": e.to_string() }),
        }
    } else {
        json!({ "skipped": format!("dimension {} above 32", model.dim()) })
    };
    let achieved = json!({
        "stable_rank": report.stable_rank,
        "abs_norm_ratio": report.abs_norm_ratio,
        "decay_r_squared": report.decay.as_ref().map(|d| d.r_squared),
        "recurrence_time": report.recurrence_time,
    });
    let out = json!({ "diagnostics": report, "resources": resources, "walk_checks": walk_checks });
    Ok((None, out, achieved))
}
