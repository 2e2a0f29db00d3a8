//! The walk space `C^D ⊗ C^D`: isometry `T`, swap `S` and walk operator `W`.
//!
//! Basis state `|α, β⟩` has index `α·D + β`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::perron::{perron_pair, SparseAbs};
use crate::exec::ExecPolicy;
use crate::linalg::{hermitian_defect, isometry_defect, max_abs_diff_c};
use crate::model::CompositeModel;
use crate::{Error, Result, C64};

/// Largest `D` for which the dense `D² × D²` walk operator is built.
pub const WALK_DIMENSION_CAP: usize = 45;

/// Gram eigenvalues below this mark a walk subspace that has collapsed to
/// one dimension (`|γ| = 1`).
const RANK_TOLERANCE: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

/// Column `α` of `T` is `|ψ_α⟩ = Σ_β f_αβ·√(v_β/(λ·v_α)) |α,β⟩` with
/// `|f_αβ|² = |h_αβ|`. The phase of `h_αβ` is carried by the factor with the
/// larger first index, `f_αβ = h_αβ/√|h_αβ|` for `α > β`, which makes
/// `T†ST = hᵀ/λ`.
///
/// Diagonal entries must be nonnegative (`f_αα = √h_αα`).
pub fn build_isometry(h: &DMatrix<C64>, hnorm: f64, v: &DVector<f64>) -> Result<DMatrix<C64>> {
    let dim = h.nrows();
    if v.len() != dim {
        return Err(Error::DimensionMismatch { what: "Perron vector", expected: dim, got: v.len() });
    }
    if let Some(a) = v.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::invalid(format!("perron_vector[{a}]"), "Perron vector must be strictly positive"));
    }
    let cutoff = super::perron::EDGE_TOLERANCE * h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut t = DMatrix::<C64>::zeros(dim * dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let hab = h[(a, b)];
            let mag = hab.norm();
            if mag <= cutoff {
                continue;
            }
            let f = if a == b {
                if hab.re < 0.0 {
                    return Err(Error::invalid(
                        format!("hamiltonian[{a}][{a}]"),
                        "negative diagonal entries cannot be split into walk amplitudes",
                    ));
                }
                C64::new(mag.sqrt(), 0.0)
            } else if a < b {
                C64::new(mag.sqrt(), 0.0)
            } else {
                hab / mag.sqrt()
            };
            t[(a * dim + b, a)] = f * (v[b] / (hnorm * v[a])).sqrt();
        }
    }
    Ok(t)
}

/// Index permutation of the register swap `S|α,β⟩ = |β,α⟩`.
pub fn swap_index(dim: usize, idx: usize) -> usize {
    (idx % dim) * dim + idx / dim
}

/// Dense swap operator (tests and small dimensions).
pub fn swap_operator(dim: usize) -> DMatrix<C64> {
    let n = dim * dim;
    let mut s = DMatrix::zeros(n, n);
    for idx in 0..n {
        s[(swap_index(dim, idx), idx)] = C64::new(1.0, 0.0);
    }
    s
}

fn apply_swap_rows(dim: usize, m: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(swap_index(dim, r), c)])
}

/// `W = i·S·(2TT† − I)`.
///
/// The factor `i` places the eigenvalues of the walk subspace at
/// `±e^{±i·arcsin γ}`; without it they sit at `e^{±i·arccos γ}`.
pub fn walk_operator(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let dim = t.ncols();
    let mut reflect = (t * t.adjoint()) * C64::new(2.0, 0.0);
    for k in 0..n {
        reflect[(k, k)] -= C64::new(1.0, 0.0);
    }
    apply_swap_rows(dim, &reflect) * I
}

/// Everything needed to run the walk for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct WalkSpace {
    h: DMatrix<C64>,
    hnorm: f64,
    perron: DVector<f64>,
    t: DMatrix<C64>,
    w: DMatrix<C64>,
}

/// Numerical checks of the construction.
#[derive(Debug, Clone, Serialize)]
pub struct WalkChecks {
    pub isometry_defect: f64,
    pub discriminant_defect: f64,
    pub unitarity_defect: f64,
    pub eigenphase_defect: f64,
    pub walk_subspace_rank: usize,
}

impl WalkSpace {
    /// Builds the walk for `h`; `T†ST = hᵀ/‖abs(h)‖`.
    pub fn new(h: &DMatrix<C64>) -> Result<Self> {
        let dim = h.nrows();
        if dim > WALK_DIMENSION_CAP {
            return Err(Error::ResourceCap { what: "dense walk operator (D)", required: dim, cap: WALK_DIMENSION_CAP });
        }
        let defect = hermitian_defect(h);
        if defect > 0.0 {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let pair = perron_pair(&SparseAbs::from_dense(h), ExecPolicy::Sequential)?;
        let t = build_isometry(h, pair.value, &pair.vector)?;
        let w = walk_operator(&t);
        Ok(WalkSpace { h: h.clone(), hnorm: pair.value, perron: pair.vector, t, w })
    }

    /// Walk whose discriminant is the model Hamiltonian itself
    /// (`T†ST = Ĥ/λ`), as needed to propagate under `e^{−iĤt}`.
    pub fn for_propagation(model: &CompositeModel) -> Result<Self> {
        WalkSpace::new(&model.assemble_hamiltonian()?.transpose())
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }
    /// `‖abs(h)‖`, the normalization of the discriminant.
    pub fn hnorm(&self) -> f64 {
        self.hnorm
    }
    pub fn perron_vector(&self) -> &DVector<f64> {
        &self.perron
    }
    pub fn isometry(&self) -> &DMatrix<C64> {
        &self.t
    }
    pub fn walk(&self) -> &DMatrix<C64> {
        &self.w
    }
    pub fn hamiltonian(&self) -> &DMatrix<C64> {
        &self.h
    }

    /// `T†ST`.
    pub fn discriminant(&self) -> DMatrix<C64> {
        self.t.adjoint() * apply_swap_rows(self.dim(), &self.t)
    }

    /// Eigenvalues `γ_ℓ` of `h/‖abs(h)‖`.
    pub fn normalized_eigenvalues(&self) -> Vec<f64> {
        let mut g: Vec<f64> = SymmetricEigen::new(self.h.clone()).eigenvalues.iter().map(|l| l / self.hnorm).collect();
        g.sort_by(f64::total_cmp);
        g
    }

    /// Orthonormal basis of `span{T|ℓ⟩, ST|ℓ⟩}` (the columns of `T` and
    /// `ST` span the same space).
    pub fn walk_subspace_basis(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let st = apply_swap_rows(dim, &self.t);
        let mut both = DMatrix::zeros(dim * dim, 2 * dim);
        both.columns_mut(0, dim).copy_from(&self.t);
        both.columns_mut(dim, dim).copy_from(&st);
        let gram = both.adjoint() * &both;
        let eig = SymmetricEigen::new(gram);
        let keep: Vec<usize> = (0..2 * dim).filter(|&k| eig.eigenvalues[k] > RANK_TOLERANCE).collect();
        let mut coeffs = DMatrix::zeros(2 * dim, keep.len());
        for (j, &k) in keep.iter().enumerate() {
            let s = eig.eigenvalues[k].sqrt().recip();
            coeffs.set_column(j, &(eig.eigenvectors.column(k) * C64::new(s, 0.0)));
        }
        both * coeffs
    }

    /// Eigenvalues of `W` restricted to the walk subspace (complex Schur of
    /// the compressed operator).
    pub fn walk_subspace_spectrum(&self) -> Vec<C64> {
        let basis = self.walk_subspace_basis();
        let compressed = basis.adjoint() * &self.w * &basis;
        schur_eigenvalues(compressed)
    }

    /// `{e^{i·s}, −e^{−i·s}}` with `s = arcsin γ` for each eigenvalue; a
    /// single `iγ` when `|γ| = 1` and the two coincide.
    pub fn expected_walk_spectrum(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for g in self.normalized_eigenvalues() {
            if 1.0 - g.abs() <= RANK_TOLERANCE {
                out.push(I * g.signum());
            } else {
                let s = g.asin();
                out.push(C64::from_polar(1.0, s));
                out.push(-C64::from_polar(1.0, -s));
            }
        }
        out
    }

    pub fn checks(&self) -> WalkChecks {
        let dim = self.dim();
        let spectrum = self.walk_subspace_spectrum();
        let expected = self.expected_walk_spectrum();
        let eigenphase_defect =
            if spectrum.len() == expected.len() { multiset_distance(&spectrum, &expected) } else { f64::INFINITY };
        WalkChecks {
            isometry_defect: isometry_defect(&self.t),
            discriminant_defect: max_abs_diff_c(
                &self.discriminant(),
                &(self.h.transpose() / C64::new(self.hnorm, 0.0)),
            ),
            unitarity_defect: max_abs_diff_c(&(self.w.adjoint() * &self.w), &DMatrix::identity(dim * dim, dim * dim)),
            eigenphase_defect,
            walk_subspace_rank: spectrum.len(),
        }
    }
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn schur_eigenvalues(m: DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    let schur = nalgebra::linalg::Schur::new(m);
    let (_, tri) = schur.unpack();
    (0..n).map(|k| tri[(k, k)]).collect()
}

/// Largest distance in a greedy nearest-neighbour matching of two equally
/// sized multisets.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, dist) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("sizes match");
        used[j] = true;
        worst = worst.max(dist);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, SystemSpec};

    fn unit_model() -> CompositeModel {
        let sys = SystemSpec::new(vec![1.0], DMatrix::from_element(1, 1, 1.0), 0).unwrap();
        CompositeModel::new(sys, BathSpec::new(vec![1.0], vec![0.3]).unwrap()).unwrap()
    }

    #[test]
    fn two_level_isometry() {
        let z = C64::new(0.0, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[z, I, -I, z]);
        let ws = WalkSpace::new(&h).unwrap();
        assert!((ws.hnorm() - 1.0).abs() < 1e-12);
        let t = ws.isometry();
        assert_eq!(t.shape(), (4, 2));
        // |ψ_0⟩ lives on |0,1⟩, |ψ_1⟩ on |1,0⟩, each with unit magnitude.
        assert!((t[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((t[(2, 1)].norm() - 1.0).abs() < 1e-12);
        assert_eq!(t[(0, 0)], z);
        assert_eq!(t[(3, 1)], z);
        assert!(isometry_defect(t) < 1e-12);
        let c = ws.checks();
        assert!(c.discriminant_defect < 1e-12);
    }

    #[test]
    fn swap_is_an_involution() {
        let s = swap_operator(3);
        assert_eq!(&s * &s, DMatrix::identity(9, 9));
        assert_eq!(swap_index(3, 5), 7);
    }

    #[test]
    fn unit_oscillator_walk_spectrum() {
        let z = C64::new(0.0, 0.0);
        let h = DMatrix::from_row_slice(2, 2, &[z, I, -I, z]);
        let ws = WalkSpace::new(&h).unwrap();
        let mut spec = ws.walk_subspace_spectrum();
        spec.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert_eq!(spec.len(), 2);
        assert!((spec[0] + I).norm() < 1e-12);
        assert!((spec[1] - I).norm() < 1e-12);
    }

    #[test]
    fn complement_carries_plus_minus_i() {
        let ws = WalkSpace::new(&unit_model().assemble_hamiltonian().unwrap()).unwrap();
        let dim = ws.dim();
        let full = schur_eigenvalues(ws.walk().clone());
        let walk = ws.walk_subspace_spectrum();
        let mut remaining = full.clone();
        for w in &walk {
            let (k, _) =
                remaining.iter().enumerate().min_by(|a, b| (a.1 - w).norm().total_cmp(&(b.1 - w).norm())).unwrap();
            remaining.swap_remove(k);
        }
        assert_eq!(remaining.len(), dim * dim - walk.len());
        for z in remaining {
            assert!((z - I).norm() < 1e-9 || (z + I).norm() < 1e-9, "{z}");
        }
        assert_eq!(walk.len(), ws.expected_walk_spectrum().len());
    }

    #[test]
    fn checks_on_small_model() {
        let ws = WalkSpace::new(&unit_model().assemble_hamiltonian().unwrap()).unwrap();
        let c = ws.checks();
        assert!(c.isometry_defect < 1e-10, "{c:?}");
        assert!(c.discriminant_defect < 1e-10, "{c:?}");
        assert!(c.unitarity_defect < 1e-10, "{c:?}");
        assert!(c.eigenphase_defect < 1e-8, "{c:?}");
    }
}
