use serde::Serialize;

use super::forests::arboricity_bound;
use crate::model::CompositeModel;
use crate::{Result, DENSE_DIMENSION_CAP};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrobeniusReport {
    /// `2·[Σ K_ii/m_i + Σ g_α²/(m_*·ν_α) + Σ ν_α²]`.
    pub closed_form: f64,
    /// `Σ K_ii/m_i`.
    pub system_closed_form: f64,
    /// `‖√K·√M⁻¹‖_F²` summed entrywise.
    pub system_entrywise: f64,
    /// `Σ |Ĥ_ab|²` over the assembled matrix, when it fits the dense cap.
    pub entrywise: Option<f64>,
}

/// `‖Ĥ‖_F²` in closed form, O(d² + N).
pub fn frobenius_norm_sq(model: &CompositeModel) -> FrobeniusReport {
    let k = model.spring();
    let masses = model.system().masses();
    let system_closed_form: f64 = (0..model.d()).map(|i| k[(i, i)] / masses[i]).sum();
    let system_entrywise = model.stiffness_block().norm_squared();
    let m_star = masses[model.star()];
    let bath = model.bath();
    let coupling: f64 = bath.couplings().iter().zip(bath.frequencies()).map(|(g, nu)| g * g / (m_star * nu)).sum();
    let modes: f64 = bath.frequencies().iter().map(|nu| nu * nu).sum();
    FrobeniusReport {
        closed_form: 2.0 * (system_closed_form + coupling + modes),
        system_closed_form,
        system_entrywise,
        entrywise: frobenius_entrywise(model),
    }
}

/// Brute-force `Σ |Ĥ_ab|²`; `None` above the dense cap.
pub fn frobenius_entrywise(model: &CompositeModel) -> Option<f64> {
    if model.dim() > DENSE_DIMENSION_CAP {
        return None;
    }
    model.assemble_hamiltonian().ok().map(|h| h.iter().map(|z| z.norm_sqr()).sum())
}

/// `‖Ĥ‖`, the largest normal-mode frequency.
pub fn spectral_norm(model: &CompositeModel) -> f64 {
    model.dynamical_arrowhead().largest_eigenvalue().sqrt()
}

/// `‖Ĥ‖_F² / ‖Ĥ‖²`.
pub fn stable_rank(model: &CompositeModel) -> f64 {
    frobenius_norm_sq(model).closed_form / spectral_norm(model).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsNormCheck {
    pub abs_norm: f64,
    pub spectral_norm: f64,
    pub ratio: f64,
    pub arboricity: usize,
    /// `ratio ≤ 2b`.
    pub within_bound: bool,
}

/// Compares `‖abs(Ĥ)‖` with `‖Ĥ‖` and the `2b` bound.
pub fn abs_norm_check(model: &CompositeModel) -> Result<AbsNormCheck> {
    let abs_norm = model.abs_arrowhead().largest_eigenvalue().sqrt();
    let spectral_norm = spectral_norm(model);
    let ratio = abs_norm / spectral_norm;
    let arboricity = arboricity_bound(model)?.forests;
    Ok(AbsNormCheck { abs_norm, spectral_norm, ratio, arboricity, within_bound: ratio <= 2.0 * arboricity as f64 })
}
