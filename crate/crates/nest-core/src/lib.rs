//! Fidelity-aware execution engine for variational quantum algorithms.
//!
//! The crate models a noisy quantum device from calibration snapshots,
//! scores circuit-to-qubit maps with an estimated success probability
//! (ESP), schedules how that fidelity should evolve over an optimization
//! run, and executes VQE/QAOA workloads on a built-in shot-based noisy
//! simulator. Three execution techniques are provided: an ESP-scheduled
//! qubit walk, a fixed best-map baseline, and a two-device low/high
//! fidelity baseline. Disjoint-zone multi-programming allows several jobs
//! to share one device.
//!
//! Compiled with the `parallel` feature (default), shot sampling and map
//! scoring fan out over rayon; results are bit-identical to the
//! sequential fallback because every shot draws from its own counter-based
//! RNG stream.

pub mod circuits;
pub mod device;
pub mod error;
pub mod fidelity;
pub mod mapping;
pub mod metrics;
pub mod optimizer;
pub mod runner;
pub mod schedule;
pub mod simulator;

mod par;
mod rng;

pub use error::{Error, Result};
