//! Small dense linear-algebra helpers shared by the model and the oracles.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result, C64};

/// Relative tolerance below which eigenvalues of a PSD matrix are clamped to zero.
pub const PSD_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Principal square root of a symmetric positive semi-definite matrix.
///
/// Eigenvalues in `[-1e-10·‖A‖, 0)` are treated as zero; anything more
/// negative is rejected.
pub fn principal_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "principal_sqrt input columns",
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let asym = max_abs_diff(a, &a.transpose());
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if asym > 1e-12 * scale {
        return Err(Error::invalid("matrix", format!("not symmetric (max asymmetry {asym:e})")));
    }
    let eig = SymmetricEigen::new(a.clone());
    let norm = eig.eigenvalues.amax();
    let tol = PSD_RELATIVE_TOLERANCE * norm;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -tol) {
        return Err(Error::NotPositiveSemidefinite { eigenvalue: bad, tolerance: tol });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    let r = q * DMatrix::from_diagonal(&roots) * q.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs_diff_c(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation of `h` from its conjugate transpose.
pub fn hermitian_defect(h: &DMatrix<C64>) -> f64 {
    max_abs_diff_c(h, &h.adjoint())
}

/// `‖A†A − I‖_max` for a matrix with orthonormal columns.
pub fn isometry_defect(a: &DMatrix<C64>) -> f64 {
    let gram = a.adjoint() * a;
    max_abs_diff_c(&gram, &DMatrix::identity(a.ncols(), a.ncols()))
}

/// Real symmetric matrix with "arrowhead" structure around one row:
///
/// ```text
/// [ core        e_s·spokesᵀ ]
/// [ spokes·e_sᵀ diag(poles) ]
/// ```
///
/// where `e_s` is the unit vector of the `star` row of the dense `core` block.
/// This is the shape of both `CᵀC` and `|C|ᵀ|C|` for the off-diagonal block
/// `C` of the encoding Hamiltonian, so its largest eigenvalue gives the
/// spectral norms without materialising a `D×D` matrix.
#[derive(Debug, Clone)]
pub struct StarArrowhead {
    pub core: DMatrix<f64>,
    pub star: usize,
    pub spokes: Vec<f64>,
    pub poles: Vec<f64>,
}

impl StarArrowhead {
    /// Largest eigenvalue by bisection on the secular equation
    /// `λmax(core + e eᵀ Σ s²/(μ − π)) = μ`; O(N) per evaluation.
    pub fn largest_eigenvalue(&self) -> f64 {
        let lambda_core = |shift: f64| -> f64 {
            let mut m = self.core.clone();
            m[(self.star, self.star)] += shift;
            SymmetricEigen::new(m).eigenvalues.max()
        };
        let coupled_max = self
            .spokes
            .iter()
            .zip(&self.poles)
            .filter(|(s, _)| **s != 0.0)
            .map(|(_, p)| *p)
            .fold(f64::NEG_INFINITY, f64::max);
        let decoupled_max = self
            .spokes
            .iter()
            .zip(&self.poles)
            .filter(|(s, _)| **s == 0.0)
            .map(|(_, p)| *p)
            .fold(f64::NEG_INFINITY, f64::max);

        if coupled_max == f64::NEG_INFINITY {
            return lambda_core(0.0).max(decoupled_max);
        }

        let secular = |mu: f64| -> f64 {
            let sigma: f64 =
                self.spokes.iter().zip(&self.poles).filter(|(s, _)| **s != 0.0).map(|(s, p)| s * s / (mu - p)).sum();
            lambda_core(sigma) - mu
        };

        // The secular function is strictly decreasing above the largest pole
        // and diverges to +∞ just above it, so the bracket below is valid.
        let scale = coupled_max.abs().max(self.core.amax()).max(1.0);
        let mut lo = coupled_max;
        let mut hi = coupled_max + scale;
        while secular(hi) > 0.0 {
            lo = hi;
            hi = coupled_max + 2.0 * (hi - coupled_max);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if secular(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).max(decoupled_max)
    }

    /// Dense assembly, used by tests as the brute-force oracle.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.core.nrows();
        let n = self.poles.len();
        let mut m = DMatrix::zeros(d + n, d + n);
        m.view_mut((0, 0), (d, d)).copy_from(&self.core);
        for (a, (&s, &p)) in self.spokes.iter().zip(&self.poles).enumerate() {
            m[(self.star, d + a)] = s;
            m[(d + a, self.star)] = s;
            m[(d + a, d + a)] = p;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(max_abs_diff(&principal_sqrt(&id).unwrap(), &id) < 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 9.0]));
        let r = principal_sqrt(&d).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        assert!(max_abs_diff(&r, &want) < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let r = principal_sqrt(&k).unwrap();
        assert!(max_abs_diff(&(&r * &r), &k) < 1e-12);
        assert!(max_abs_diff(&r, &r.transpose()) == 0.0);
        assert!(SymmetricEigen::new(r).eigenvalues.min() > 0.0);
    }

    #[test]
    fn sqrt_clamps_tiny_negative_and_rejects_real_negative() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-13]);
        let r = principal_sqrt(&a).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        assert!(matches!(principal_sqrt(&b), Err(Error::NotPositiveSemidefinite { .. })));
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(principal_sqrt(&c), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn arrowhead_matches_dense() {
        let core = DMatrix::from_row_slice(2, 2, &[2.0, -0.3, -0.3, 1.5]);
        let arrow =
            StarArrowhead { core, star: 1, spokes: vec![0.1, -0.2, 0.05, 0.0], poles: vec![0.5, 1.2, 3.0, 4.0] };
        let dense = SymmetricEigen::new(arrow.to_dense()).eigenvalues.max();
        assert!((arrow.largest_eigenvalue() - dense).abs() < 1e-12 * dense);

        let arrow2 = StarArrowhead { spokes: vec![0.1, -0.2, 0.05, 0.3], ..arrow };
        let dense2 = SymmetricEigen::new(arrow2.to_dense()).eigenvalues.max();
        assert!((arrow2.largest_eigenvalue() - dense2).abs() < 1e-12 * dense2);
    }
}
