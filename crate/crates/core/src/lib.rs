//! Numerical core for simulating spontaneous decay of a two-level atom in a
//! structured reservoir whose spectral density is a sum of Lorentzians.
//!
//! Every Lorentzian term is replaced by a damped pseudomode, which turns the
//! non-Markovian atomic dynamics into a Markovian problem on a small,
//! single-excitation Hilbert space. The crate evolves that problem three
//! independent ways (effective non-Hermitian Hamiltonian, Lindblad master
//! equation, direct memory-kernel integration), tabulates the closed-form
//! damped Jaynes-Cummings solution, samples quantum-jump times, and computes
//! jump-time statistics. A brute-force discretized bath is provided as an
//! oracle that knows nothing about pseudomodes.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and the parallel sampling harness live in the `pseudomode`
//! crate.
//!
//! Units: `ħ = 1`; all rates and frequencies are angular and share a single
//! inverse-time unit.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod prelude;

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod jumps;
pub mod matrix;
pub mod ode;
pub mod oracle;
pub mod poly;
pub mod quad;
pub mod spectral;
pub mod stats;

pub use num_complex::Complex64;

pub use analytic::DampedJcParams;
pub use dynamics::{AmplitudeTrajectory, AtomState, DensityTrajectory};
pub use error::{Error, Result};
pub use grid::{ComplexSeries, TimeGrid};
pub use jumps::{JumpSampleSet, JumpStatistics};
pub use ode::Tolerances;
pub use spectral::{LorentzianTerm, Pseudomode, PseudomodeModel, SpectralDensity};
pub use stats::{ExpectedTimes, Markovianity};
