//! Simulation library for a symmetric quartic double well driven by a strong
//! monochromatic field.
//!
//! The pieces fit together as a pipeline:
//!
//! 1. [`spectrum`] diagonalizes the field-free well in an oscillator basis
//!    and exposes energies, parities, and dipole matrix elements;
//! 2. [`drive`] tunes the laser to the 0- <-> 3+ transition and fixes the
//!    field amplitude through Omega12/omega_L;
//! 3. [`tdse`] integrates the exact driven dynamics in the truncated
//!    eigenbasis (and the bare three-level model);
//! 4. [`analytic`] evaluates the closed-form solution with Bessel-dressed
//!    parameters, whose decoupled state |1'(tau)> traps the population;
//! 5. [`master`] adds spontaneous emission from the upper level and follows
//!    the primed-basis density matrix into the dark steady state.
//!
//! All quantities are dimensionless; time is the laser phase tau = omega_L t.

pub mod analytic;
pub mod bessel;
pub mod drive;
pub mod error;
pub mod master;
pub mod spectrum;
pub mod tdse;

pub use error::{Error, Result};
