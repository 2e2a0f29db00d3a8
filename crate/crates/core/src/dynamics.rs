//! Classical reference dynamics of the composite system.
//!
//! Two independent solvers of the same linear equations of motion:
//! exact propagation in normal modes ([`NormalModes`]) and a symplectic
//! leapfrog integrator ([`evolve_verlet`]).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::exec::ExecPolicy;
use crate::model::CompositeModel;
use crate::{Error, Result};

/// Phase-space snapshot of the composite system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub t: f64,
    pub x: DVector<f64>,
    pub p: DVector<f64>,
    pub y: DVector<f64>,
    pub k: DVector<f64>,
}

impl PhaseState {
    pub fn zeros(model: &CompositeModel) -> Self {
        let (d, n) = (model.d(), model.n_modes());
        PhaseState { t: 0.0, x: DVector::zeros(d), p: DVector::zeros(d), y: DVector::zeros(n), k: DVector::zeros(n) }
    }

    /// Largest absolute coordinate difference (time stamp excluded).
    pub fn max_abs_diff(&self, other: &PhaseState) -> f64 {
        let diff = |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax();
        diff(&self.x, &other.x).max(diff(&self.p, &other.p)).max(diff(&self.y, &other.y)).max(diff(&self.k, &other.k))
    }

    /// Flips the sign of every momentum (time reversal).
    pub fn reversed(&self) -> Self {
        PhaseState { t: self.t, x: self.x.clone(), p: -&self.p, y: self.y.clone(), k: -&self.k }
    }

    pub fn check_dims(&self, model: &CompositeModel) -> Result<()> {
        let checks = [
            ("state.x", model.d(), self.x.len()),
            ("state.p", model.d(), self.p.len()),
            ("state.y", model.n_modes(), self.y.len()),
            ("state.k", model.n_modes(), self.k.len()),
        ];
        for (what, expected, got) in checks {
            if expected != got {
                return Err(Error::DimensionMismatch { what, expected, got });
            }
        }
        Ok(())
    }
}

/// Bath initially at rest in equilibrium with the displaced star mass:
/// `y_α = (g_α/ν_α)·x_*`, `k_α = 0`.
pub fn initial_state(model: &CompositeModel, x0: &[f64], p0: &[f64]) -> Result<PhaseState> {
    let d = model.d();
    if x0.len() != d {
        return Err(Error::DimensionMismatch { what: "initial x0", expected: d, got: x0.len() });
    }
    if p0.len() != d {
        return Err(Error::DimensionMismatch { what: "initial p0", expected: d, got: p0.len() });
    }
    let x_star = x0[model.star()];
    let bath = model.bath();
    let y = DVector::from_iterator(
        model.n_modes(),
        bath.couplings().iter().zip(bath.frequencies()).map(|(g, nu)| g / nu * x_star),
    );
    Ok(PhaseState {
        t: 0.0,
        x: DVector::from_column_slice(x0),
        p: DVector::from_column_slice(p0),
        y,
        k: DVector::zeros(model.n_modes()),
    })
}

/// Primary-system energy
/// `½Σ(p_i²/m_i + κ_ii x_i²) + ½Σ_{i<j} κ_ij (x_i − x_j)²`.
pub fn system_energy(model: &CompositeModel, x: &DVector<f64>, p: &DVector<f64>) -> f64 {
    let sys = model.system();
    let kappa = sys.kappa();
    let d = sys.d();
    let mut e = 0.0;
    for i in 0..d {
        e += 0.5 * (p[i] * p[i] / sys.masses()[i] + kappa[(i, i)] * x[i] * x[i]);
        for j in (i + 1)..d {
            let dx = x[i] - x[j];
            e += 0.5 * kappa[(i, j)] * dx * dx;
        }
    }
    e
}

/// Bath energy `½Σ ν_α (k_α² + (y_α − g_α x_*/ν_α)²)`.
pub fn bath_energy(model: &CompositeModel, state: &PhaseState) -> f64 {
    let x_star = state.x[model.star()];
    let bath = model.bath();
    bath.frequencies()
        .iter()
        .zip(bath.couplings())
        .enumerate()
        .map(|(a, (nu, g))| {
            let shifted = state.y[a] - g / nu * x_star;
            0.5 * nu * (state.k[a] * state.k[a] + shifted * shifted)
        })
        .sum()
}

/// Total conserved energy `H_S + H_B`.
pub fn total_energy(model: &CompositeModel, state: &PhaseState) -> f64 {
    system_energy(model, &state.x, &state.p) + bath_energy(model, state)
}

/// Right-hand side of the equations of motion in matrix form:
///
/// ```text
/// ẋ = M⁻¹p           ṗ = −Kx + G(√F y − Gᵀx)
/// ẏ = F k            k̇ = −F y + √F Gᵀ x
/// ```
pub fn equations_of_motion(model: &CompositeModel, state: &PhaseState) -> PhaseState {
    let star = model.star();
    let bath = model.bath();
    let masses = model.system().masses();
    let x_star = state.x[star];
    let xdot = DVector::from_iterator(model.d(), state.p.iter().zip(masses).map(|(p, m)| p / m));
    let mut pdot = -(model.spring() * &state.x);
    let mut bath_force = 0.0;
    let mut ydot = DVector::zeros(model.n_modes());
    let mut kdot = DVector::zeros(model.n_modes());
    for (a, (&nu, &g)) in bath.frequencies().iter().zip(bath.couplings()).enumerate() {
        bath_force += g * (state.y[a] - g / nu * x_star);
        ydot[a] = nu * state.k[a];
        kdot[a] = -nu * state.y[a] + g * x_star;
    }
    pdot[star] += bath_force;
    PhaseState { t: state.t, x: xdot, p: pdot, y: ydot, k: kdot }
}

/// Exact solution of the linear equations of motion.
///
/// With mass-weighted coordinates `u = (√m·x, y/√ν)` and velocities
/// `w = (p/√m, √ν·k)` the dynamics is `u̇ = w`, `ẇ = −Ω²u`; `Ω²` is
/// diagonalized once and every query is a rotation in each mode.
#[derive(Debug, Clone)]
pub struct NormalModes {
    d: usize,
    modes: DMatrix<f64>,
    omega: DVector<f64>,
    /// `√m_i` then `1/√ν_α`.
    weights: DVector<f64>,
}

impl NormalModes {
    pub fn new(model: &CompositeModel) -> Result<Self> {
        let (d, n) = (model.d(), model.n_modes());
        let star = model.star();
        let bath = model.bath();
        let masses = model.system().masses();

        // Potential-energy Hessian of H_S + H_B in (x, y).
        let mut hessian = DMatrix::zeros(d + n, d + n);
        hessian.view_mut((0, 0), (d, d)).copy_from(model.spring());
        for (a, (&nu, &g)) in bath.frequencies().iter().zip(bath.couplings()).enumerate() {
            hessian[(star, star)] += g * g / nu;
            hessian[(star, d + a)] = -g;
            hessian[(d + a, star)] = -g;
            hessian[(d + a, d + a)] = nu;
        }
        let weights = DVector::from_iterator(
            d + n,
            masses.iter().map(|m| m.sqrt()).chain(bath.frequencies().iter().map(|nu| nu.sqrt().recip())),
        );
        let inv_w = weights.map(f64::recip);
        let omega2 = DMatrix::from_fn(d + n, d + n, |i, j| inv_w[i] * hessian[(i, j)] * inv_w[j]);
        let eig = SymmetricEigen::try_new(omega2, f64::EPSILON, 0).ok_or(Error::NoConvergence {
            what: "normal-mode eigendecomposition",
            iterations: 0,
            residual: f64::NAN,
        })?;
        let min = eig.eigenvalues.min();
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(NormalModes { d, modes: eig.eigenvectors, omega: eig.eigenvalues.map(f64::sqrt), weights })
    }

    /// Normal-mode angular frequencies (ascending order not guaranteed).
    pub fn frequencies(&self) -> &DVector<f64> {
        &self.omega
    }

    fn to_modal(&self, state: &PhaseState) -> (DVector<f64>, DVector<f64>) {
        let d = self.d;
        let n = self.weights.len() - d;
        let u = DVector::from_fn(d + n, |i, _| {
            if i < d {
                self.weights[i] * state.x[i]
            } else {
                self.weights[i] * state.y[i - d]
            }
        });
        let w = DVector::from_fn(d + n, |i, _| {
            if i < d {
                state.p[i] / self.weights[i]
            } else {
                state.k[i - d] / self.weights[i]
            }
        });
        (self.modes.tr_mul(&u), self.modes.tr_mul(&w))
    }

    fn rotate(&self, a: &DVector<f64>, b: &DVector<f64>, dt: f64) -> (DVector<f64>, DVector<f64>) {
        let mut a_t = a.clone();
        let mut b_t = b.clone();
        for j in 0..a.len() {
            let w = self.omega[j];
            let (s, c) = (w * dt).sin_cos();
            a_t[j] = a[j] * c + b[j] * s / w;
            b_t[j] = -a[j] * w * s + b[j] * c;
        }
        (a_t, b_t)
    }

    /// State at time `state.t + dt`.
    pub fn evolve(&self, state: &PhaseState, dt: f64) -> PhaseState {
        let d = self.d;
        let (a, b) = self.to_modal(state);
        let (a_t, b_t) = self.rotate(&a, &b, dt);
        let u = &self.modes * a_t;
        let w = &self.modes * b_t;
        let n = self.weights.len() - d;
        PhaseState {
            t: state.t + dt,
            x: DVector::from_fn(d, |i, _| u[i] / self.weights[i]),
            p: DVector::from_fn(d, |i, _| w[i] * self.weights[i]),
            y: DVector::from_fn(n, |a, _| u[d + a] / self.weights[d + a]),
            k: DVector::from_fn(n, |a, _| w[d + a] * self.weights[d + a]),
        }
    }

    /// Full states at each time offset from `state.t`.
    pub fn trajectory(&self, state: &PhaseState, offsets: &[f64], policy: ExecPolicy) -> Vec<PhaseState> {
        let d = self.d;
        let n = self.weights.len() - d;
        let (a, b) = self.to_modal(state);
        policy.map_range(offsets.len(), |i| {
            let (a_t, b_t) = self.rotate(&a, &b, offsets[i]);
            let u = &self.modes * a_t;
            let w = &self.modes * b_t;
            PhaseState {
                t: state.t + offsets[i],
                x: DVector::from_fn(d, |r, _| u[r] / self.weights[r]),
                p: DVector::from_fn(d, |r, _| w[r] * self.weights[r]),
                y: DVector::from_fn(n, |a, _| u[d + a] / self.weights[d + a]),
                k: DVector::from_fn(n, |a, _| w[d + a] * self.weights[d + a]),
            }
        })
    }

    /// Primary coordinates `(x, p)` at each requested time offset from
    /// `state.t`, touching only the `d` primary rows of the mode matrix.
    pub fn primary_trajectory(
        &self,
        state: &PhaseState,
        offsets: &[f64],
        policy: ExecPolicy,
    ) -> Vec<(DVector<f64>, DVector<f64>)> {
        let d = self.d;
        let (a, b) = self.to_modal(state);
        let rows = self.modes.rows(0, d).into_owned();
        policy.map_range(offsets.len(), |i| {
            let (a_t, b_t) = self.rotate(&a, &b, offsets[i]);
            let u = &rows * a_t;
            let w = &rows * b_t;
            (DVector::from_fn(d, |r, _| u[r] / self.weights[r]), DVector::from_fn(d, |r, _| w[r] * self.weights[r]))
        })
    }
}

/// Exact evolution by `dt`; builds the mode decomposition on every call.
/// Prefer [`NormalModes`] when querying many times.
pub fn evolve_normal_modes(model: &CompositeModel, state: &PhaseState, dt: f64) -> Result<PhaseState> {
    state.check_dims(model)?;
    Ok(NormalModes::new(model)?.evolve(state, dt))
}

/// Kick-drift-kick leapfrog over a duration `dt_total` with step at most `step`.
/// The step is shrunk so an integer number of steps lands exactly on the end time.
pub fn evolve_verlet(model: &CompositeModel, state: &PhaseState, dt_total: f64, step: f64) -> Result<PhaseState> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("dt", format!("step must be positive, got {step}")));
    }
    state.check_dims(model)?;
    let steps = (dt_total.abs() / step).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(state.clone());
    }
    let h = dt_total / steps as f64;
    let mut s = state.clone();
    let mut f = equations_of_motion(model, &s);
    for _ in 0..steps {
        s.p.axpy(0.5 * h, &f.p, 1.0);
        s.k.axpy(0.5 * h, &f.k, 1.0);
        let v = equations_of_motion(model, &s);
        s.x.axpy(h, &v.x, 1.0);
        s.y.axpy(h, &v.y, 1.0);
        f = equations_of_motion(model, &s);
        s.p.axpy(0.5 * h, &f.p, 1.0);
        s.k.axpy(0.5 * h, &f.k, 1.0);
    }
    s.t = state.t + dt_total;
    Ok(s)
}
