//! Simulation of two Kerr-parametric-oscillator cat qubits coupled through a
//! bus cavity: Fock-space algebra, cat-qubit bases, model Hamiltonians,
//! composite multi-tone drives, time evolution and experiment drivers.

pub mod error;
pub mod cat;
pub mod dynamics;
pub mod experiments;
pub mod fock;
pub mod hamiltonians;
pub mod pulses;
mod quad;

pub use error::{Error, Result};
pub use fock::C64;
