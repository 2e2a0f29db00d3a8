//! Phase estimation over the walk, on `C^{2^p} ⊗ C^{D²}`.
//!
//! States are stored register-major: amplitude `(j, w)` sits at
//! `j·D² + w`, so each register value owns a contiguous walk block.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::{Fft, FftPlanner};

use crate::exec::ExecPolicy;
use crate::{Error, Result, C64};

/// Default bound on `D²·2^p`, the number of stored amplitudes.
pub const DEFAULT_RESOURCE_CAP: usize = 1 << 22;

/// Largest supported number of phase bits.
pub const MAX_PHASE_BITS: u32 = 20;

/// The phase-estimation unitary `Q` (Hadamards, controlled powers of `W`,
/// inverse Fourier transform) and its inverse.
pub struct PhaseEstimation {
    block: usize,
    bits: u32,
    powers: Vec<DMatrix<C64>>,
    adjoint_powers: Vec<DMatrix<C64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PhaseEstimation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseEstimation").field("block", &self.block).field("bits", &self.bits).finish()
    }
}

impl PhaseEstimation {
    pub fn new(w: &DMatrix<C64>, bits: u32, cap: usize) -> Result<Self> {
        if bits == 0 || bits > MAX_PHASE_BITS {
            return Err(Error::invalid("phase_bits", format!("must lie in 1..={MAX_PHASE_BITS}")));
        }
        if !w.is_square() {
            return Err(Error::DimensionMismatch {
                what: "walk operator columns",
                expected: w.nrows(),
                got: w.ncols(),
            });
        }
        let block = w.nrows();
        let required = block.saturating_mul(1usize << bits);
        if required > cap {
            return Err(Error::ResourceCap { what: "phase-estimation state (D²·2^p)", required, cap });
        }
        let mut powers = Vec::with_capacity(bits as usize);
        let mut current = w.clone();
        for _ in 0..bits {
            let next = &current * &current;
            powers.push(current);
            current = next;
        }
        let adjoint_powers = powers.iter().map(|m| m.adjoint()).collect();
        let mut planner = FftPlanner::new();
        let len = 1usize << bits;
        Ok(PhaseEstimation {
            block,
            bits,
            powers,
            adjoint_powers,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn phase_bits(&self) -> u32 {
        self.bits
    }
    pub fn register_len(&self) -> usize {
        1 << self.bits
    }
    /// Walk-space dimension `D²`.
    pub fn block_len(&self) -> usize {
        self.block
    }
    pub fn state_len(&self) -> usize {
        self.block * self.register_len()
    }
    /// Calls to `W` made by one application of `Q` (controlled `W^{2^k}`
    /// counts `2^k`).
    pub fn walk_queries(&self) -> usize {
        self.register_len() - 1
    }
    /// Dense matrix-vector products made by one application of `Q`.
    pub fn matvecs(&self) -> usize {
        self.bits as usize * self.register_len() / 2
    }

    /// `Q`.
    pub fn apply(&self, state: &mut [C64], policy: ExecPolicy) {
        self.check_len(state);
        self.hadamard_all(state, policy);
        self.controlled_powers(state, &self.powers, policy);
        self.fourier(state, &self.forward, policy);
    }

    /// `Q†`.
    pub fn apply_inverse(&self, state: &mut [C64], policy: ExecPolicy) {
        self.check_len(state);
        self.fourier(state, &self.inverse, policy);
        self.controlled_powers(state, &self.adjoint_powers, policy);
        self.hadamard_all(state, policy);
    }

    fn check_len(&self, state: &[C64]) {
        assert_eq!(state.len(), self.state_len(), "phase-estimation state has the wrong length");
    }

    fn hadamard_all(&self, state: &mut [C64], policy: ExecPolicy) {
        let block = self.block;
        let mut half = 1;
        while half < self.register_len() {
            policy.for_each_chunk_mut(state, 2 * half * block, |_, chunk| {
                let (lo, hi) = chunk.split_at_mut(half * block);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x + y;
                    *b = x - y;
                }
            });
            half *= 2;
        }
        let scale = (self.register_len() as f64).sqrt().recip();
        state.iter_mut().for_each(|z| *z *= scale);
    }

    fn controlled_powers(&self, state: &mut [C64], powers: &[DMatrix<C64>], policy: ExecPolicy) {
        policy.for_each_chunk_mut(state, self.block, |j, chunk| {
            let mut v = DVector::from_column_slice(chunk);
            for (k, m) in powers.iter().enumerate() {
                if (j >> k) & 1 == 1 {
                    v = m * v;
                }
            }
            chunk.copy_from_slice(v.as_slice());
        });
    }

    /// Unitary DFT along the register index of every walk coordinate.
    fn fourier(&self, state: &mut [C64], fft: &Arc<dyn Fft<f64>>, policy: ExecPolicy) {
        let (len, block) = (self.register_len(), self.block);
        let mut columns = vec![C64::new(0.0, 0.0); state.len()];
        for j in 0..len {
            for w in 0..block {
                columns[w * len + j] = state[j * block + w];
            }
        }
        let scale = (len as f64).sqrt().recip();
        policy.for_each_chunk_mut(&mut columns, len, |_, col| {
            fft.process(col);
            col.iter_mut().for_each(|z| *z *= scale);
        });
        for j in 0..len {
            for w in 0..block {
                state[j * block + w] = columns[w * len + j];
            }
        }
    }
}

/// Phase `2π·m̃/2^p` labelled by register value `m`, with `m̃` read as a
/// two's-complement integer in `[−2^{p−1}, 2^{p−1})`.
pub fn register_phase(bits: u32, m: usize) -> f64 {
    let len = 1i64 << bits;
    let mut signed = m as i64;
    if signed >= len / 2 {
        signed -= len;
    }
    2.0 * PI * signed as f64 / len as f64
}

/// Diagonal of the phase oracle: register value `m` picks up
/// `e^{−i·τ·H·sin(s̃_m)}`.
pub fn phase_oracle(bits: u32, tau: f64, hnorm: f64) -> Vec<C64> {
    (0..1usize << bits).map(|m| C64::from_polar(1.0, -tau * hnorm * register_phase(bits, m).sin())).collect()
}

/// Multiplies each register block by its oracle phase.
pub fn apply_phase_oracle(state: &mut [C64], diagonal: &[C64], policy: ExecPolicy) {
    let block = state.len() / diagonal.len();
    policy.for_each_chunk_mut(state, block, |m, chunk| {
        let phase = diagonal[m];
        chunk.iter_mut().for_each(|z| *z *= phase);
    });
}

/// Probability of each register value.
pub fn register_distribution(state: &[C64], register_len: usize) -> Vec<f64> {
    let block = state.len() / register_len;
    state.chunks(block).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
}

/// Textbook phase-estimation distribution for an eigenphase `theta`:
/// `P(m) = sin²(Mδ/2) / (M² sin²(δ/2))` with `δ = θ − 2πm/M`.
pub fn fejer_profile(bits: u32, theta: f64) -> Vec<f64> {
    let len = 1usize << bits;
    let mf = len as f64;
    (0..len)
        .map(|m| {
            let delta = theta - 2.0 * PI * m as f64 / mf;
            let den = (delta / 2.0).sin();
            if den.abs() < 1e-12 {
                1.0
            } else {
                ((mf * delta / 2.0).sin() / (mf * den)).powi(2)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagonal_walk(phases: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(phases.len(), phases.iter().map(|&t| C64::from_polar(1.0, t))))
    }

    fn loaded(qpe: &PhaseEstimation, v: &[C64]) -> Vec<C64> {
        let mut s = vec![C64::new(0.0, 0.0); qpe.state_len()];
        s[..v.len()].copy_from_slice(v);
        s
    }

    #[test]
    fn exact_bins() {
        let w = diagonal_walk(&[0.0, PI / 2.0]);
        let qpe = PhaseEstimation::new(&w, 2, DEFAULT_RESOURCE_CAP).unwrap();
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        for (v, bin) in [([one, zero], 0), ([zero, one], 1)] {
            let mut s = loaded(&qpe, &v);
            qpe.apply(&mut s, ExecPolicy::Sequential);
            let dist = register_distribution(&s, 4);
            assert!((dist[bin] - 1.0).abs() < 1e-12, "{dist:?}");
        }
    }

    #[test]
    fn between_bins_follows_fejer() {
        let theta = 2.0 * PI * 0.3137;
        let w = diagonal_walk(&[theta]);
        for bits in [3, 5, 7] {
            let qpe = PhaseEstimation::new(&w, bits, DEFAULT_RESOURCE_CAP).unwrap();
            let mut s = loaded(&qpe, &[C64::new(1.0, 0.0)]);
            qpe.apply(&mut s, ExecPolicy::Sequential);
            let got = register_distribution(&s, qpe.register_len());
            let want = fejer_profile(bits, theta);
            let tv: f64 = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            assert!(tv < 1e-8, "bits {bits}: tv {tv}");
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let w = diagonal_walk(&[0.1, -1.3, 2.9]);
        let qpe = PhaseEstimation::new(&w, 4, DEFAULT_RESOURCE_CAP).unwrap();
        let mut s: Vec<C64> =
            (0..qpe.state_len()).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let orig = s.clone();
        qpe.apply(&mut s, ExecPolicy::Parallel);
        qpe.apply_inverse(&mut s, ExecPolicy::Parallel);
        let err = s.iter().zip(&orig).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn resource_cap_is_enforced() {
        let w = diagonal_walk(&[0.0; 4]);
        let err = PhaseEstimation::new(&w, 4, 32).unwrap_err();
        assert!(matches!(err, Error::ResourceCap { required: 64, cap: 32, .. }));
        assert!(PhaseEstimation::new(&w, 0, DEFAULT_RESOURCE_CAP).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert!(phase_oracle(6, 0.0, 3.0).iter().all(|z| (z - C64::new(1.0, 0.0)).norm() == 0.0));
        let diag = phase_oracle(2, 1.0, 1.0);
        assert_eq!(diag[0], C64::new(1.0, 0.0));
        // m = 1 of 4 is s̃ = π/2.
        assert!((diag[1] - C64::from_polar(1.0, -1.0)).norm() < 1e-15);
        assert!((register_phase(2, 3) + PI / 2.0).abs() < 1e-15);
    }
}
