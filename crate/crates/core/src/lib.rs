//! Models of a quantum-dot repeater chain: entanglement distribution rates,
//! component and end-to-end fidelities, a Monte Carlo of the nested
//! protocol timing, and exact small-system quantum oracles.

pub mod acceptance;
pub mod error;
pub mod exec;
pub mod fidelity;
pub mod mcsim;
pub mod output;
pub mod params;
pub mod qsim;
pub mod quadrature;
pub mod rates;

pub use error::{Error, Result};
pub use exec::Execution;
pub use params::ParameterSet;
