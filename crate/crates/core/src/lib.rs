//! Simulation of entanglement-assisted weak cloning.
//!
//! Two observers weakly measure observables on an unknown qudit state
//! `|φ⟩`. One of them holds `|φ⟩` itself, the other holds half of a maximally
//! entangled pair. After a post-selection onto the maximally entangled state,
//! both pointer momenta shift by `-γ ⟨φ|X|φ⟩` to first order in the coupling
//! strength, as if each observer had their own copy of `|φ⟩`.
//!
//! The crate is layered bottom-up:
//!
//! - [`tensor`]: state vectors over ordered qudit subsystems, embedded
//!   operators, projections, partial traces and Hermitian eigensolvers.
//! - [`pointer`]: sampled Gaussian pointer wave functions with spectral
//!   momentum moments.
//! - [`weak`]: von Neumann couplings on joint qudit/pointer states, in a grid
//!   representation and an exact shifted-Gaussian ensemble representation.
//! - [`protocols`]: end-to-end drivers (weak cloning, teleportation baseline,
//!   multi-party chains, qudits).
//! - [`fit`]: log-log convergence slopes.

pub mod error;
pub mod fit;
pub mod pointer;
pub mod protocols;
pub mod tensor;
pub mod weak;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
