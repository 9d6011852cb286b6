//! Simulation and certification toolkit for the two-demon Maxwell engine
//! under pure dephasing noise.
//!
//! Energies are in units of ħω throughout. Multi-qubit operators use wire 0
//! as the leftmost tensor factor; see [`qcore`].

pub mod circuit;
pub mod cli;
pub mod climit;
pub mod error;
pub mod engine;
pub mod noise;
pub mod qcore;
pub mod superpose;

pub use error::{Error, Result};
