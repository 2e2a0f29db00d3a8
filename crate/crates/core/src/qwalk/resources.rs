//! Cost accounting for walk-based simulation.

use serde::Serialize;

use super::qpe::MAX_PHASE_BITS;
use super::simulate::segment_count;
use crate::diagnostics::arboricity_bound;
use crate::model::CompositeModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceEstimate {
    pub t: f64,
    pub eps: f64,
    pub d: usize,
    pub nu_max: f64,
    /// `‖abs(Ĥ)‖`.
    pub hnorm: f64,
    /// Forest count of the certified decomposition of the graph of `Ĥ`.
    pub arboricity: usize,
    /// `‖abs(Ĥ)‖·|t|/√ε`.
    pub repetitions: f64,
    /// `b·ν_max·|t|/√ε`.
    pub formula_cost: f64,
    /// Emulation counts.
    pub segments: usize,
    pub phase_bits: u32,
    pub walk_queries_per_segment: usize,
    pub matvecs_per_segment: usize,
    pub walk_queries: usize,
    pub matvecs: usize,
}

/// Phase bits whose bin width `2π/2^p` is below `√ε`.
pub fn suggested_phase_bits(eps: f64) -> u32 {
    let bits = (2.0 * std::f64::consts::PI / eps.sqrt()).log2().ceil();
    (bits.max(1.0) as u32).min(MAX_PHASE_BITS)
}

/// Instantiates the cost formula for `model` and reports the matching
/// emulation counts. `phase_bits` defaults to [`suggested_phase_bits`].
pub fn resource_estimate(
    model: &CompositeModel,
    t: f64,
    eps: f64,
    phase_bits: Option<u32>,
) -> Result<ResourceEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid("walk.target_eps", "must lie in (0, 1)"));
    }
    if !t.is_finite() {
        return Err(Error::invalid("run.t_final", "must be finite"));
    }
    let hnorm = model.abs_arrowhead().largest_eigenvalue().sqrt();
    let arboricity = arboricity_bound(model)?.forests;
    let nu_max = model.bath().nu_max();
    let root = eps.sqrt();
    let phase_bits = phase_bits.unwrap_or_else(|| suggested_phase_bits(eps));
    let segments = segment_count(hnorm, t, None);
    let reg = 1usize << phase_bits;
    let walk_queries_per_segment = 2 * (reg - 1);
    let matvecs_per_segment = phase_bits as usize * reg;
    Ok(ResourceEstimate {
        t,
        eps,
        d: model.d(),
        nu_max,
        hnorm,
        arboricity,
        repetitions: hnorm * t.abs() / root,
        formula_cost: arboricity as f64 * nu_max * t.abs() / root,
        segments,
        phase_bits,
        walk_queries_per_segment,
        matvecs_per_segment,
        walk_queries: walk_queries_per_segment * segments,
        matvecs: matvecs_per_segment * segments,
    })
}
