//! Experiment configuration, figure presets, CSV output and run manifests.

mod config;
mod csv;
mod manifest;
mod presets;
mod runner;

pub use self::config::{
    parse_config, parse_config_as, ChargingSpec, ExperimentConfig, FeedbackGain, InitialState, Mode,
    ModelSpec, SimSpec, SweepAxis, SweepSpec, TimeSpec, DEFAULT_EPSILON, DEFAULT_FAN, DEFAULT_SAMPLES,
};
pub use self::csv::{read_csv, write_csv, Cell, Table};
pub use self::manifest::{Diagnostics, RunManifest};
pub use self::presets::*;
pub use self::runner::{
    check_diagnostics, energy_column, ensemble_tables, run_config, steady_analytic_point,
    steady_numeric_point, write_outputs, Output, RunResult,
};
