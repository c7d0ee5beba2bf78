//! Run manifests written next to every output file.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Numerical health of a run, accumulated over all of its parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest relative steady-state residual ‖𝓛ρ‖/‖L‖.
    pub max_steady_residual: Option<f64>,
    /// Smallest relative uniqueness gap of a steady-state solve.
    pub min_steady_gap: Option<f64>,
    /// Negative eigenvalues clipped while repairing steady states.
    pub positivity_repairs: usize,
    /// Smallest eigenvalue of any sampled joint state.
    pub min_eigenvalue: Option<f64>,
    /// Adaptive integrator steps taken.
    pub integrator_steps: usize,
    /// Stochastic trajectories simulated.
    pub trajectories: usize,
}

fn merge_min(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Diagnostics {
    pub fn merge(&mut self, o: &Diagnostics) {
        self.max_steady_residual = match (self.max_steady_residual, o.max_steady_residual) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, None) => x,
            (None, y) => y,
        };
        self.min_steady_gap = merge_min(self.min_steady_gap, o.min_steady_gap);
        self.positivity_repairs += o.positivity_repairs;
        self.min_eigenvalue = merge_min(self.min_eigenvalue, o.min_eigenvalue);
        self.integrator_steps += o.integrator_steps;
        self.trajectories += o.trajectories;
    }

    pub fn eigenvalue(&mut self, v: f64) {
        self.min_eigenvalue = merge_min(self.min_eigenvalue, Some(v));
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// Preset name or mode of the run.
    pub run: String,
    /// Echo of the document that was run, when there was one.
    pub config_text: Option<String>,
    /// Fully resolved settings, sufficient to reproduce the outputs.
    pub resolved: serde_json::Value,
    pub seed: u64,
    pub efficiency_rule: String,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub diagnostics: Diagnostics,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}
