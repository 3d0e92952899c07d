//! Configuration, Monte Carlo orchestration and artifact output for the
//! post-selected CNOT simulator.

pub mod commands;
pub mod config;
pub mod engine;
pub mod output;

pub use commands::{run, Command};
pub use config::RunConfig;
