//! Measurement-based cooling of a Duffing resonator coupled to a spin.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`] and [`linalg`]: truncated Fock space, spin operators, joint
//!   states and dense Hermitian linear algebra.
//! - [`model`]: Jaynes-Cummings Hamiltonian with a Duffing term, plus
//!   exact and perturbative resonator ground states.
//! - [`dynamics`]: unitary and Lindblad propagation, static or driven.
//! - [`observables`]: occupation, ground-state fidelity, covariance,
//!   entropy and non-Gaussianity.
//! - [`control`]: CRAB pulses and their optimization.
//! - [`protocols`]: spin projection, the concatenated and single-shot
//!   cooling schemes.
//!
//! Energies are in units of the resonator frequency, times in its inverse.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod protocols;

pub use error::{Error, Result};
