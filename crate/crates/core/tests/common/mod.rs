#![allow(dead_code)]

use clbath::dynamics::PhaseState;
use clbath::model::{BathSpec, CompositeModel, SystemSpec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Dense nonnegative `κ` with positive walls; `K` is then strictly
/// diagonally dominant and positive-definite.
pub fn random_kappa<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(d, d);
    for i in 0..d {
        k[(i, i)] = rng.random_range(0.5..1.5);
        for j in (i + 1)..d {
            let v = rng.random_range(0.05..1.0);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub fn random_model<R: Rng>(rng: &mut R, d: usize, n: usize) -> CompositeModel {
    let masses = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    let star = rng.random_range(0..d);
    let sys = SystemSpec::new(masses, random_kappa(rng, d), star).unwrap();
    let nus = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let gs = (0..n)
        .map(|_| {
            let g: f64 = rng.random_range(0.05..0.5);
            if rng.random_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect();
    CompositeModel::new(sys, BathSpec::new(nus, gs).unwrap()).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, model: &CompositeModel) -> PhaseState {
    let mut v = |len: usize| DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0));
    PhaseState { t: 0.0, x: v(model.d()), p: v(model.d()), y: v(model.n_modes()), k: v(model.n_modes()) }
}

pub fn unit_model(nus: &[f64], gs: &[f64]) -> CompositeModel {
    let sys = SystemSpec::new(vec![1.0], DMatrix::from_element(1, 1, 1.0), 0).unwrap();
    CompositeModel::new(sys, BathSpec::new(nus.to_vec(), gs.to_vec()).unwrap()).unwrap()
}

/// Independent normal-mode frequencies: square roots of the generalized
/// eigenvalues of the potential Hessian against the kinetic metric, solved
/// by Cholesky reduction.
pub fn normal_mode_frequencies(model: &CompositeModel) -> Vec<f64> {
    let (d, n) = (model.d(), model.n_modes());
    let bath = model.bath();
    // Potential ½Σκ_ii x² + ½Σ_{i<j}κ_ij(x_i−x_j)² + Σ ½ν(y − g x_*/ν)², in (x, y).
    let mut v = DMatrix::<f64>::zeros(d + n, d + n);
    let kappa = model.system().kappa();
    for i in 0..d {
        v[(i, i)] += kappa[(i, i)];
        for j in 0..d {
            if i != j {
                v[(i, i)] += kappa[(i, j)];
                v[(i, j)] -= kappa[(i, j)];
            }
        }
    }
    let s = model.star();
    for (a, (&nu, &g)) in bath.frequencies().iter().zip(bath.couplings()).enumerate() {
        v[(d + a, d + a)] += nu;
        v[(s, s)] += g * g / nu;
        v[(s, d + a)] -= g;
        v[(d + a, s)] -= g;
    }
    // Kinetic ½Σp²/m + Σ ½ν k²: velocity metric diag(m, 1/ν).
    let metric = DVector::from_iterator(
        d + n,
        model.system().masses().iter().copied().chain(bath.frequencies().iter().map(|nu| 1.0 / nu)),
    );
    let l = metric.map(f64::sqrt);
    let reduced = DMatrix::from_fn(d + n, d + n, |i, j| v[(i, j)] / (l[i] * l[j]));
    let eig: DVector<f64> = reduced.symmetric_eigenvalues();
    let mut w: Vec<f64> = eig.iter().map(|e| e.sqrt()).collect();
    w.sort_by(f64::total_cmp);
    w
}
