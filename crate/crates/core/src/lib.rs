//! Simulated photonic variational eigensolver with zero-noise extrapolation.
//!
//! The crate models a six-mode programmable linear-optical chip running a
//! two-qubit VQE for the Schwinger Hamiltonian. Photon distinguishability is
//! the controllable noise knob `ε = 1 − V` (V the HOM visibility), and the
//! error is removed by linear extrapolation to `ε = 0`.
//!
//! Layering, bottom-up:
//!
//! * [`optics`]: mode unitaries and two-photon coincidence statistics for
//!   partially distinguishable pairs.
//! * [`processor`]: the chip layout, phase settings, post-selected CNOT and
//!   per-basis outcome probabilities.
//! * [`schwinger`]: the Hamiltonian, its exact spectrum and the energy
//!   estimators from probabilities or counts.
//! * [`sampling`]: Poissonian shot noise with reproducible RNG streams.
//! * [`mitigation`]: ε(θ), the two-point and least-squares extrapolators and
//!   the deferred-mitigation measurement budget.
//! * [`spsa`]: the stochastic optimizer.
//! * [`harness`]: VQE runs, sweeps and file output used by the CLI.

// `!(x <= y)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod mitigation;
pub mod optics;
pub mod processor;
pub mod sampling;
pub mod schwinger;
pub mod spsa;

pub use error::{Error, Result};
pub use num_complex::Complex64;
