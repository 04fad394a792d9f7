//! Config-driven experiment runner: reads a TOML file, runs the selected
//! pipeline and writes `report.json`, CSV tables, SVG plots and `manifest.json`.

pub mod config;
pub mod manifest;
pub mod plots;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Mode, Overrides};
pub use manifest::{Failure, RunManifest};
pub use run::{run, RunError};
