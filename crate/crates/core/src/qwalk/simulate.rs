//! The composite step `U = T†·Q†·P(τ)·Q·T`, repeated over time segments.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::qpe::{apply_phase_oracle, phase_oracle, PhaseEstimation};
use super::space::WalkSpace;
use crate::exec::ExecPolicy;
use crate::hamsim::{propagate, SpectralData};
use crate::model::CompositeModel;
use crate::qstate::{decode, EncodedState};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseConfig {
    pub phase_bits: u32,
    pub target_eps: f64,
    /// Number of time segments; `None` selects `max(1, ⌈‖abs(Ĥ)‖·|t|⌉)`.
    pub repetitions: Option<usize>,
}

impl PhaseConfig {
    pub fn new(phase_bits: u32, target_eps: f64, repetitions: Option<usize>) -> Result<Self> {
        if phase_bits == 0 {
            return Err(Error::invalid("walk.phase_bits", "must be at least 1"));
        }
        if !(target_eps > 0.0 && target_eps < 1.0) {
            return Err(Error::invalid("walk.target_eps", "must lie in (0, 1)"));
        }
        if repetitions == Some(0) {
            return Err(Error::invalid("walk.repetitions", "must be at least 1"));
        }
        Ok(PhaseConfig { phase_bits, target_eps, repetitions })
    }
}

/// Number of segments used for total time `t`.
pub fn segment_count(hnorm: f64, t: f64, repetitions: Option<usize>) -> usize {
    repetitions.unwrap_or_else(|| ((hnorm * t.abs()).ceil() as usize).max(1))
}

/// A walk and its phase estimation, ready to propagate states.
#[derive(Debug)]
pub struct WalkSimulator {
    space: WalkSpace,
    qpe: PhaseEstimation,
    policy: ExecPolicy,
}

impl WalkSimulator {
    pub fn new(model: &CompositeModel, phase_bits: u32, cap: usize, policy: ExecPolicy) -> Result<Self> {
        WalkSimulator::from_space(WalkSpace::for_propagation(model)?, phase_bits, cap, policy)
    }

    /// `space` must encode the Hamiltonian to propagate under, i.e. be built
    /// from its transpose.
    pub fn from_space(space: WalkSpace, phase_bits: u32, cap: usize, policy: ExecPolicy) -> Result<Self> {
        let qpe = PhaseEstimation::new(space.walk(), phase_bits, cap)?;
        Ok(WalkSimulator { space, qpe, policy })
    }

    pub fn space(&self) -> &WalkSpace {
        &self.space
    }
    pub fn phase_estimation(&self) -> &PhaseEstimation {
        &self.qpe
    }

    /// One application of `U` with segment time `tau`.
    pub fn segment(&self, psi: &DVector<C64>, tau: f64) -> DVector<C64> {
        let t = self.space.isometry();
        let block = self.qpe.block_len();
        let mut state = vec![C64::new(0.0, 0.0); self.qpe.state_len()];
        state[..block].copy_from_slice((t * psi).as_slice());
        self.qpe.apply(&mut state, self.policy);
        let diag = phase_oracle(self.qpe.phase_bits(), tau, self.space.hnorm());
        apply_phase_oracle(&mut state, &diag, self.policy);
        self.qpe.apply_inverse(&mut state, self.policy);
        t.ad_mul(&DVector::from_column_slice(&state[..block]))
    }

    /// `U` as a dense `D × D` matrix.
    pub fn segment_matrix(&self, tau: f64) -> DMatrix<C64> {
        let dim = self.space.dim();
        let mut u = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut e = DVector::zeros(dim);
            e[c] = C64::new(1.0, 0.0);
            u.set_column(c, &self.segment(&e, tau));
        }
        u
    }

    /// Advances `psi` by `t` in `segments` equal steps.
    pub fn evolve(&self, psi: &EncodedState, t: f64, segments: usize) -> EncodedState {
        let tau = t / segments as f64;
        let mut amps = psi.amplitudes.clone();
        for _ in 0..segments {
            amps = self.segment(&amps, tau);
        }
        EncodedState { amplitudes: amps, e0: psi.e0, t: psi.t + t, layout: psi.layout }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub phase_bits: u32,
    pub segments: usize,
    pub segment_time: f64,
    pub hnorm: f64,
    /// `|⟨ψ_exact|ψ_walk⟩|²`.
    pub fidelity: f64,
    /// `‖ψ_walk‖²`; probability mass lost to the uncomputed register.
    pub norm_retained: f64,
    /// Largest amplitude deviation from exact propagation.
    pub state_error: f64,
    /// Largest deviation of decoded primary `(x, p)` from exact propagation.
    pub decoded_error: f64,
    /// `1 − fidelity`.
    pub achieved_eps: f64,
    pub target_eps: f64,
    pub met_target: bool,
    pub walk_queries: usize,
    pub matvecs: usize,
}

#[derive(Debug, Clone)]
pub struct WalkOutcome {
    pub state: EncodedState,
    pub report: WalkReport,
}

/// Compares a walk-propagated state against the exact one.
pub fn compare(
    model: &CompositeModel,
    walk: &EncodedState,
    exact: &EncodedState,
    sim: &WalkSimulator,
    cfg: &PhaseConfig,
    segments: usize,
    t: f64,
) -> Result<WalkReport> {
    let a = decode(model, walk)?;
    let b = decode(model, exact)?;
    let decoded_error = (&a.x - &b.x).amax().max((&a.p - &b.p).amax());
    let fidelity = exact.fidelity(walk);
    let achieved_eps = (1.0 - fidelity).max(0.0);
    let qpe = sim.phase_estimation();
    Ok(WalkReport {
        phase_bits: cfg.phase_bits,
        segments,
        segment_time: t / segments as f64,
        hnorm: sim.space().hnorm(),
        fidelity,
        norm_retained: walk.amplitudes.norm_squared(),
        state_error: walk.max_abs_diff(exact),
        decoded_error,
        achieved_eps,
        target_eps: cfg.target_eps,
        met_target: achieved_eps <= cfg.target_eps,
        walk_queries: 2 * qpe.walk_queries() * segments,
        matvecs: 2 * qpe.matvecs() * segments,
    })
}

/// Propagates `psi0` by `t` with the walk and reports the error against
/// exact propagation. A missed `target_eps` is reported, not raised.
pub fn simulate(
    model: &CompositeModel,
    psi0: &EncodedState,
    t: f64,
    cfg: &PhaseConfig,
    cap: usize,
    policy: ExecPolicy,
) -> Result<WalkOutcome> {
    let sim = WalkSimulator::new(model, cfg.phase_bits, cap, policy)?;
    let segments = segment_count(sim.space().hnorm(), t, cfg.repetitions);
    let state = sim.evolve(psi0, t, segments);
    let exact = propagate(&SpectralData::for_model(model)?, psi0, t);
    let report = compare(model, &state, &exact, &sim, cfg, segments, t)?;
    Ok(WalkOutcome { state, report })
}
