//! Pulse-level laboratory for nonadiabatic holonomic single-qubit gates
//! driven along two dark paths of a four-level ion, with the tools to
//! characterize them (process tomography, randomized benchmarking, Rabi
//! error sweeps) and an ion-phonon controlled-phase extension.

pub mod characterization;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod pulse;
pub mod quantum;
pub mod twoqubit;

pub use error::{Error, Result};
