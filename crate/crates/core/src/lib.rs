//! Benchmarking quantum simulators with time-averaged mixed-state
//! equivalence: classical orthodox-mixed-state expectation values are set
//! against time-averaged expectation values measured through a simulator,
//! inside energy windows of a lattice Hamiltonian family.

pub mod bench;
pub mod coarse_grain;
pub mod error;
pub mod eta;
pub mod hamiltonian;
pub mod linalg;
pub mod mcmc;
pub mod quantum;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
