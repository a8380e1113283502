//! Experiment runner for `fcp-core`: configs, presets, a rayon executor and
//! the CSV / JSON / SVG outputs behind the `fcp` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;

pub use commands::{run, Outcome, Report};
pub use config::{Command, ExperimentConfig, NamedModel};
pub use error::{exit, LabError, LabResult};
pub use exec::RayonExecutor;
