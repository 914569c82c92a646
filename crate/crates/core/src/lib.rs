//! Open-system simulation of chiral atom-photon routing.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: dense operator algebra, Lindblad superoperators,
//!   steady-state solves and adaptive time evolution for small systems.
//! * [`routing`]: the three-level effective Hamiltonian, direction and
//!   helicity dependent non-Hermiticity, Zeeman-weighted chiral
//!   susceptibilities and the transmission / isolation figures of merit.
//! * [`qubit`]: dual-rail polarization-qubit channel built from per-rail
//!   transmission amplitudes.
//! * [`tomography`]: six-basis measurement simulation and constrained
//!   maximum-likelihood state reconstruction.
//! * [`storage`]: write/store/read pulse dynamics of the spin-wave diode.
//! * [`calibration`]: least-squares fit of the model to target
//!   transmissions.
//!
//! All rates, detunings and Rabi frequencies are in units of the excited
//! state decay rate Γ, times in units of 1/Γ. Conversion to laboratory
//! units lives in [`units`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod quantum;
pub mod qubit;
pub mod routing;
pub mod storage;
pub mod tomography;
pub mod units;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
