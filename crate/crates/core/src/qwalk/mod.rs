//! Statevector emulation of Hamiltonian simulation by a Szegedy walk.
//!
//! The walk is built from the Perron pair of `abs(Ĥ)` ([`perron`]), lifted to
//! `C^D ⊗ C^D` by the isometry `T` ([`space`]), and its eigenphases are read
//! out with phase estimation ([`qpe`]). [`simulate`] composes
//! `U = T†·Q†·P·Q·T`; [`resources`] reports what that costs.

pub mod perron;
pub mod qpe;
pub mod resources;
pub mod simulate;
pub mod space;

pub use perron::{abs_principal_eigenvector, perron_pair, PerronPair, SparseAbs};
pub use qpe::{PhaseEstimation, DEFAULT_RESOURCE_CAP};
pub use resources::{resource_estimate, ResourceEstimate};
pub use simulate::{simulate, PhaseConfig, WalkOutcome, WalkReport, WalkSimulator};
pub use space::{build_isometry, walk_operator, WalkChecks, WalkSpace};
