//! Exact propagation `e^{−iĤt} = V·e^{−iDt}·V†` through a dense spectral
//! decomposition. This is the quantum-side oracle, capped at
//! [`DENSE_DIMENSION_CAP`](crate::DENSE_DIMENSION_CAP).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::linalg::hermitian_defect;
use crate::model::CompositeModel;
use crate::qstate::EncodedState;
use crate::{Error, Result, C64, DENSE_DIMENSION_CAP};

/// Eigenvectors (columns of a unitary `V`) and real eigenvalues of `Ĥ`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub vectors: DMatrix<C64>,
    pub values: DVector<f64>,
}

pub fn spectral_decompose(h: &DMatrix<C64>) -> Result<SpectralData> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch { what: "Hamiltonian columns", expected: h.nrows(), got: h.ncols() });
    }
    if h.nrows() > DENSE_DIMENSION_CAP {
        return Err(Error::ResourceCap {
            what: "dense spectral decomposition",
            required: h.nrows(),
            cap: DENSE_DIMENSION_CAP,
        });
    }
    let defect = hermitian_defect(h);
    if defect > 1e-12 * h.iter().map(|z| z.norm()).fold(1.0, f64::max) {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let eig = SymmetricEigen::new(h.clone());
    Ok(SpectralData { vectors: eig.eigenvectors, values: eig.eigenvalues })
}

impl SpectralData {
    pub fn for_model(model: &CompositeModel) -> Result<Self> {
        spectral_decompose(&model.assemble_hamiltonian()?)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Spectral norm `max |λ|`.
    pub fn norm(&self) -> f64 {
        self.values.amax()
    }

    /// `V·D·V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| self.vectors[(r, c)] * self.values[c]);
        scaled * self.vectors.adjoint()
    }

    /// `e^{−iĤt}ψ` for a raw amplitude vector.
    pub fn apply(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeffs = self.vectors.ad_mul(psi);
        for (c, &l) in coeffs.iter_mut().zip(self.values.iter()) {
            *c *= C64::from_polar(1.0, -l * t);
        }
        &self.vectors * coeffs
    }

    /// Dense propagator `e^{−iĤt}`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            self.vectors[(r, c)] * C64::from_polar(1.0, -self.values[c] * t)
        });
        scaled * self.vectors.adjoint()
    }
}

/// Advances an encoded state by `t`.
pub fn propagate(sd: &SpectralData, psi: &EncodedState, t: f64) -> EncodedState {
    EncodedState { amplitudes: sd.apply(&psi.amplitudes, t), e0: psi.e0, t: psi.t + t, layout: psi.layout }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::initial_state;
    use crate::linalg::{isometry_defect, max_abs_diff_c};
    use crate::model::{BathSpec, SystemSpec};
    use crate::qstate::{decode, encode};
    use std::f64::consts::FRAC_PI_2;

    fn sorted(v: &DVector<f64>) -> Vec<f64> {
        let mut s: Vec<f64> = v.iter().copied().collect();
        s.sort_by(f64::total_cmp);
        s
    }

    #[test]
    fn pauli_like_blocks() {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[z, i, -i, z]);
        let sd = spectral_decompose(&h).unwrap();
        let ev = sorted(&sd.values);
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);

        let mut h4 = DMatrix::zeros(4, 4);
        h4.view_mut((0, 0), (2, 2)).copy_from(&h);
        h4.view_mut((2, 2), (2, 2)).copy_from(&h);
        let ev4 = sorted(&spectral_decompose(&h4).unwrap().values);
        for (g, w) in ev4.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
        );
        assert!(matches!(spectral_decompose(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn quarter_period_of_unit_oscillator() {
        let sys = SystemSpec::new(vec![1.0], DMatrix::from_element(1, 1, 1.0), 0).unwrap();
        let m = CompositeModel::new(sys, BathSpec::new(vec![1.0], vec![0.0]).unwrap()).unwrap();
        let sd = SpectralData::for_model(&m).unwrap();
        assert!(isometry_defect(&sd.vectors) < 1e-12);
        assert!(max_abs_diff_c(&sd.reconstruct(), &m.assemble_hamiltonian().unwrap()) < 1e-12);
        let psi = encode(&m, &initial_state(&m, &[1.0], &[0.0]).unwrap()).unwrap();
        let same = propagate(&sd, &psi, 0.0);
        assert!(same.max_abs_diff(&psi) < 1e-14);
        let out = decode(&m, &propagate(&sd, &psi, FRAC_PI_2)).unwrap();
        assert!(out.x[0].abs() < 1e-12);
        assert!((out.p[0] + 1.0).abs() < 1e-12);
    }
}
