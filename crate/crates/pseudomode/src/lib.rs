//! Config files, output formats, parallel sampling and the `pseudomode`
//! command line on top of [`pseudomode_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod sampling;

pub use pseudomode_core as core;

pub use commands::{run, Command, RunError, RunOptions};
pub use config::{ConfigError, SimulationConfig};
pub use output::{write_all, Artifact, Format, Table};
pub use sampling::sample_parallel;
