//! Simulation core for a post-selected linear-optical CNOT gate driven by a
//! pulsed quantum-dot single-photon source.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; Monte Carlo routines take an explicit random
//! stream so callers control seeding and sharding.
//!
//! Layout:
//!
//! * [`fock`]: Fock-space linear optics (mode unitaries, permanents,
//!   partially distinguishable two-photon detection probabilities).
//! * [`gate`]: waveplates and the polarization-encoded CNOT circuit.
//! * [`source`]: the quantum-dot source model.
//! * [`experiment`]: correlation histograms, peak areas, overlap
//!   correction and normalization.
//! * [`analysis`]: truth tables, correlation estimators, Bell fidelity, g².
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod fock;
pub mod gate;
pub mod matrix;
pub mod source;

pub use error::{Error, Result};
pub use num_complex::Complex64;
