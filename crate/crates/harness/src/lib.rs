//! Experiment driver: initial data, epsilon sweeps, corrector verification and
//! invariant ledgers.

pub mod config;
pub mod datum;
pub mod fit;
pub mod invariants;
pub mod report;
pub mod simulate;
pub mod sweep;
pub mod verify;

pub use config::ExperimentConfig;
