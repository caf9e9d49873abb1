//! Simulation and verification harness for Manhattan-grid controller
//! networks with periphery wrap-arounds.
//!
//! The crate builds the grid, routes configuration and acknowledgement
//! packets with an XY variant, runs lock-step simulations under seeded
//! contention, enumerates every contention outcome on small grids to prove
//! or refute deadlock freedom, and estimates acknowledgement and completion
//! metrics by Monte Carlo sampling.

pub mod config;
pub mod engine;
pub mod error;
pub mod explorer;
pub mod export;
pub mod gateway;
pub mod node;
pub mod routing;
pub mod stats;
pub mod topology;
pub mod variant;
pub mod waitfor;

pub use config::ExperimentConfig;
pub use engine::{run, ParallelMode, RunOptions, RunResult, SimConfig, TraceEvent, World};
pub use error::{Error, Result};
pub use explorer::{explore, Bounds, Verdict};
pub use gateway::Ordering;
pub use stats::{estimate, run_experiment, Estimate, EstimateRow};
pub use topology::{Coord, GatewayId, Grid, GridSpec};
pub use variant::Variant;
pub use waitfor::{wait_for_graph, WaitForGraph};

/// Double-precision estimate, the default for reported metrics.
pub type Estimate64 = Estimate<f64>;
/// Single-precision estimate.
pub type Estimate32 = Estimate<f32>;
