//! Agent-based simulation of open collaboration.
//!
//! Agents of three cooperative types (cooperators, reciprocators, free
//! riders) draw needs over a set of good types and consume from a shared
//! commons that is open to everyone. The crate bundles the model, a
//! deterministic sweep harness, the statistics used to summarize sweeps, and
//! CSV/SVG reporting.

pub mod engine;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod model;
pub mod report;
pub mod stats;

pub use engine::{run, run_replications, RunResult, Simulation};
pub use error::{Error, Result};
pub use metrics::MetricsFrame;
pub use model::{CooperationType, GoodType, ModelParams, PopulationMix};
