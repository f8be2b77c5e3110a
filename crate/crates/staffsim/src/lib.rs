//! Simulation harness, file formats and CLI around the `staffsim-core`
//! engine.

pub mod cli;
pub mod config;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sim;
