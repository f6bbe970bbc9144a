//! Library surface of the experiment runner, kept separate from the binary
//! so the pipeline is testable in-process.

pub mod config;
pub mod emit;
pub mod experiments;

pub use config::{parse_config, RunConfig};
pub use experiments::{run, RunOutcome};
