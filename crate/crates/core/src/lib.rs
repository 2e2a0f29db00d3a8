//! Classical oscillator networks coupled to a Caldeira-Leggett bath, and the
//! quantum algorithm that simulates them.
//!
//! The crate provides three independent routes to the same trajectory:
//!
//! * [`dynamics`]: the classical equations of motion, solved exactly in normal
//!   modes or stepped with a symplectic leapfrog integrator;
//! * [`hamsim`]: the amplitude-encoded state ([`qstate`]) propagated exactly
//!   under the block Hamiltonian by spectral decomposition;
//! * [`qwalk`]: a statevector emulation of the Szegedy-walk + phase-estimation
//!   simulation primitive, `U = T† Q† P Q T`.
//!
//! [`diagnostics`] computes the structural quantities that govern cost and
//! classical hardness (norms, stable rank, arboricity) and the dissipation
//! observables that separate Markovian from finite-bath behaviour.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod exec;
pub mod hamsim;
pub mod linalg;
pub mod model;
pub mod qstate;
pub mod qwalk;

pub use error::{Error, Result};
pub use nalgebra::Complex;

/// Double-precision complex scalar used for every quantum amplitude.
pub type C64 = Complex<f64>;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Dense matrices above this order are refused by the exact oracles.
pub const DENSE_DIMENSION_CAP: usize = 4096;
