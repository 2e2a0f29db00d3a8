//! Amplitude encoding of classical phase-space data and the readout back.
//!
//! ```text
//! |ψ⟩ = (√K·x | √M⁻¹·p | √F·y − Gᵀ·x | √F·k) / √(2E₀)
//! ```
//!
//! The squared norm of the un-normalized vector is exactly `2·H`, so the
//! state has unit norm when `E₀` is the total energy. `E₀` travels with the
//! state as classical side information; decoding needs it to restore scale.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::dynamics::{total_energy, PhaseState};
use crate::model::{BlockLayout, CompositeModel};
use crate::{Error, Result, C64};

/// Two-sided 95% normal quantile used for confidence radii.
const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedState {
    pub amplitudes: DVector<C64>,
    pub e0: f64,
    pub t: f64,
    pub layout: BlockLayout,
}

impl EncodedState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Largest `|Im ψ_a|`; zero for states produced from classical data and
    /// exact evolution.
    pub fn imaginary_residue(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &EncodedState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    pub fn max_abs_diff(&self, other: &EncodedState) -> f64 {
        (&self.amplitudes - &other.amplitudes).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// The un-normalized block vector `√(2E₀)·ψ` (real).
pub fn raw_blocks(model: &CompositeModel, state: &PhaseState) -> Result<DVector<f64>> {
    state.check_dims(model)?;
    let l = model.layout();
    let mut v = DVector::zeros(l.dim());
    let sk_x = model.sqrt_spring() * &state.x;
    v.rows_mut(0, l.d).copy_from(&sk_x);
    v.rows_mut(l.d, l.d).copy_from(&state.p.component_mul(model.inv_sqrt_mass()));
    let x_star = state.x[model.star()];
    let nus = model.bath().frequencies();
    let g_row = model.g_row();
    let (b3, b4) = (l.bath_position().start, l.bath_momentum().start);
    for a in 0..l.n {
        let s = nus[a].sqrt();
        v[b3 + a] = s * state.y[a] - g_row[a] * x_star;
        v[b4 + a] = s * state.k[a];
    }
    Ok(v)
}

/// Encodes a phase-space state; `E₀` is its total energy.
pub fn encode(model: &CompositeModel, state: &PhaseState) -> Result<EncodedState> {
    let e0 = total_energy(model, state);
    if !(e0 > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let raw = raw_blocks(model, state)?;
    let scale = (2.0 * e0).sqrt().recip();
    Ok(EncodedState { amplitudes: raw.map(|v| C64::new(v * scale, 0.0)), e0, t: state.t, layout: model.layout() })
}

/// Inverts the encoding, taking real parts of the amplitudes.
pub fn decode(model: &CompositeModel, psi: &EncodedState) -> Result<PhaseState> {
    let l = model.layout();
    if psi.layout != l {
        return Err(Error::DimensionMismatch {
            what: "encoded state dimension",
            expected: l.dim(),
            got: psi.layout.dim(),
        });
    }
    let scale = (2.0 * psi.e0).sqrt();
    let re = |r: std::ops::Range<usize>| DVector::from_iterator(r.len(), r.map(|i| psi.amplitudes[i].re * scale));
    let x = model.inv_sqrt_spring() * re(l.position());
    let p = re(l.momentum()).component_div(model.inv_sqrt_mass());
    let b3 = re(l.bath_position());
    let b4 = re(l.bath_momentum());
    let x_star = x[model.star()];
    let nus = model.bath().frequencies();
    let g_row = model.g_row();
    let y = DVector::from_fn(l.n, |a, _| (b3[a] + g_row[a] * x_star) / nus[a].sqrt());
    let k = DVector::from_fn(l.n, |a, _| b4[a] / nus[a].sqrt());
    Ok(PhaseState { t: psi.t, x, p, y, k })
}

/// [`decode`], refusing states whose imaginary residue exceeds `tol`.
pub fn decode_checked(model: &CompositeModel, psi: &EncodedState, tol: f64) -> Result<PhaseState> {
    let residue = psi.imaginary_residue();
    if residue > tol {
        return Err(Error::invalid("encoded state", format!("imaginary residue {residue:e} exceeds {tol:e}")));
    }
    decode(model, psi)
}

/// Estimated primary-block amplitudes (`2d` entries: positions then momenta).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TomographyEstimate {
    /// Real amplitude estimates, with the reference amplitude taken positive
    /// (the global sign of a quantum state is unobservable).
    pub amplitudes: Vec<f64>,
    /// 95% confidence radius of each amplitude magnitude.
    pub radii: Vec<f64>,
    /// Index (into the full `D` vector) of the sign reference.
    pub reference: usize,
    pub shots: u64,
}

impl TomographyEstimate {
    /// Flips the global sign to best match `truth` (a `2d` amplitude vector).
    pub fn aligned_with(&self, truth: &[f64]) -> Vec<f64> {
        let dot: f64 = self.amplitudes.iter().zip(truth).map(|(a, b)| a * b).sum();
        let s = if dot < 0.0 { -1.0 } else { 1.0 };
        self.amplitudes.iter().map(|a| s * a).collect()
    }

    /// Primary coordinates `(x, p)` from the estimate, given `E₀` and the
    /// global sign (`±1`) supplied as side information.
    pub fn primary_coordinates(&self, model: &CompositeModel, e0: f64, sign: f64) -> (DVector<f64>, DVector<f64>) {
        let d = model.d();
        let scale = sign * (2.0 * e0).sqrt();
        let b1 = DVector::from_iterator(d, self.amplitudes[..d].iter().map(|a| a * scale));
        let b2 = DVector::from_iterator(d, self.amplitudes[d..].iter().map(|a| a * scale));
        (model.inv_sqrt_spring() * b1, b2.component_div(model.inv_sqrt_mass()))
    }
}

/// Direct (infinite-shot) readout of the primary amplitudes.
pub fn direct_readout(psi: &EncodedState) -> TomographyEstimate {
    let d = psi.layout.d;
    TomographyEstimate {
        amplitudes: (0..2 * d).map(|i| psi.amplitudes[i].re).collect(),
        radii: vec![0.0; 2 * d],
        reference: 0,
        shots: u64::MAX,
    }
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("probability in (0,1)").sample(rng)
}

/// Multinomial draw by sequential conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut remaining = shots;
    let mut mass = probs.iter().sum::<f64>();
    probs
        .iter()
        .map(|&p| {
            let c = if mass > 0.0 { binomial(rng, remaining, (p / mass).min(1.0)) } else { 0 };
            remaining -= c;
            mass -= p;
            c
        })
        .collect()
}

/// Wilson-score 95% radius on `√p̂`.
fn magnitude_radius(count: u64, shots: u64) -> f64 {
    let n = shots as f64;
    let p = count as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let (lo, hi) = ((centre - half).max(0.0), (centre + half).min(1.0));
    (hi.sqrt() - p.sqrt()).max(p.sqrt() - lo.sqrt())
}

/// Emulated sampling readout of the `2d` primary amplitudes.
///
/// Magnitudes come from `shots` computational-basis measurements over all
/// `D` outcomes. Each relative sign comes from `shots` measurements in a basis
/// containing `(e_a ± e_r)/√2`, where `r` is the reference amplitude: the
/// largest primary amplitude, or the largest overall when that one is below
/// `1/√D`.
pub fn tomography_sample(psi: &EncodedState, shots: u64, seed: u64) -> Result<TomographyEstimate> {
    if shots == 0 {
        return Err(Error::invalid("run.shots", "at least one shot is required"));
    }
    let dim = psi.layout.dim();
    let d = psi.layout.d;
    let norm2 = psi.amplitudes.norm_squared();
    if !(norm2 > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let unit: Vec<C64> = psi.amplitudes.iter().map(|z| z / norm2.sqrt()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let probs: Vec<f64> = unit.iter().map(|z| z.norm_sqr()).collect();
    let counts = multinomial(&mut rng, shots, &probs);
    let mags: Vec<f64> = counts.iter().map(|&c| (c as f64 / shots as f64).sqrt()).collect();

    let threshold = (dim as f64).sqrt().recip();
    let argmax = |range: std::ops::Range<usize>| {
        range.max_by(|&a, &b| mags[a].total_cmp(&mags[b]).then(b.cmp(&a))).expect("nonempty")
    };
    let mut reference = argmax(0..2 * d);
    if mags[reference] < threshold {
        reference = argmax(0..dim);
    }

    let r = unit[reference];
    let mut amplitudes = Vec::with_capacity(2 * d);
    for a in 0..2 * d {
        if a == reference {
            amplitudes.push(mags[a]);
            continue;
        }
        let plus = 0.5 * (unit[a] + r).norm_sqr();
        let minus = 0.5 * (unit[a] - r).norm_sqr();
        let other = (1.0 - plus - minus).max(0.0);
        let c = multinomial(&mut rng, shots, &[plus, minus, other]);
        let sign = if c[1] > c[0] { -1.0 } else { 1.0 };
        amplitudes.push(sign * mags[a]);
    }
    let radii = (0..2 * d).map(|a| magnitude_radius(counts[a], shots)).collect();
    Ok(TomographyEstimate { amplitudes, radii, reference, shots })
}
