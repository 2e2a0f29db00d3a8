//! Structural and dissipative diagnostics.
//!
//! Norms, stable rank and the forest decomposition govern the cost of walk
//! simulation and the reach of classical dequantization. The dissipation
//! observables separate damping into a broad bath from exchange with a few
//! modes.

mod dissipation;
mod forests;
mod norms;

pub use dissipation::{decay_fit, envelope_peaks, recurrence_time, DecayFit, DEFAULT_RECURRENCE_THRESHOLD};
pub use forests::{arboricity_bound, forest_decomposition, ForestCertificate};
pub use norms::{
    abs_norm_check, frobenius_entrywise, frobenius_norm_sq, spectral_norm, stable_rank, AbsNormCheck, FrobeniusReport,
};

use serde::Serialize;

use crate::model::CompositeModel;
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub spectral_norm: f64,
    pub frobenius: FrobeniusReport,
    pub abs_norm: f64,
    pub abs_norm_ratio: f64,
    pub stable_rank: f64,
    pub arboricity_bound: usize,
    pub decay: Option<DecayFit>,
    /// Why no decay fit is reported, when there is none.
    pub decay_note: Option<String>,
    pub recurrence_time: Option<f64>,
}

impl DiagnosticsReport {
    /// The model-only quantities; trajectory observables left empty.
    pub fn structural(model: &CompositeModel) -> Result<Self> {
        let frobenius = frobenius_norm_sq(model);
        let check = abs_norm_check(model)?;
        Ok(DiagnosticsReport {
            spectral_norm: check.spectral_norm,
            stable_rank: frobenius.closed_form / (check.spectral_norm * check.spectral_norm),
            frobenius,
            abs_norm: check.abs_norm,
            abs_norm_ratio: check.ratio,
            arboricity_bound: check.arboricity,
            decay: None,
            decay_note: None,
            recurrence_time: None,
        })
    }

    /// Adds the decay fit of `x_*` and the recurrence time of `H_S`.
    pub fn with_trajectory(mut self, times: &[f64], x_star: &[f64], system_energy: &[f64], theta: f64) -> Self {
        match decay_fit(times, x_star, None) {
            Ok(fit) => self.decay = Some(fit),
            Err(e) => self.decay_note = Some(e.to_string()),
        }
        self.recurrence_time = recurrence_time(times, system_energy, theta);
        self
    }
}
