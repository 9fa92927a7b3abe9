//! Experiment driver for the planar-code crate: seeded Monte Carlo sweeps,
//! threshold estimation, thermal lifetime studies, and byte-stable result
//! emission.
//!
//! The library half of the `planar-code-lab` binary. Everything routes
//! through [`config::ExperimentConfig`], one JSON document per run; the
//! sweeps in [`sweep`] schedule trials by static stride over counter-based
//! streams, so a `(config, seed)` pair names one exact result table no
//! matter how many workers execute it.

pub mod config;
pub mod crossing;
pub mod stats;
pub mod sweep;
pub mod table;

pub use config::ExperimentConfig;
pub use crossing::estimate_crossing;
pub use sweep::{run_lifetime_sweep, run_threshold_sweep};
pub use table::{LifetimeTable, ResultTable};
