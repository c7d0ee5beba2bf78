//! Executes configurations and presets and writes their outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Mode};
use super::csv::{write_csv, Cell, Table};
use super::manifest::{Diagnostics, RunManifest};
use crate::energetics::{battery_report, EnergyReport};
use crate::error::{Error, Result};
use crate::model::{JointOperators, ModelParams};
use crate::quantum::DensityMatrix;
use crate::steady::{
    charging_time_with, evolve_master_equation, steady_battery_analytic, steady_state_with,
    uniform_samples, ChargingOptions, SteadyOptions,
};
use crate::trajectory::{run_ensemble, EnsembleResult, SimulationParams};

/// A named table; written as `<stem>.csv` plus `<stem>.manifest.json`.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub stem: String,
    pub table: Table,
}

/// Everything a run produced, before it touches the file system.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub run: String,
    pub outputs: Vec<Output>,
    pub diagnostics: Diagnostics,
    pub resolved: serde_json::Value,
    pub seed: u64,
    pub efficiency_rule: String,
}

/// Column name for an energy-like quantity.
pub fn energy_column(name: &str, normalize: bool) -> String {
    if normalize {
        format!("{name}_over_Emax")
    } else {
        name.to_string()
    }
}

fn scale(p: &ModelParams, normalize: bool) -> f64 {
    if normalize {
        1.0 / p.e_max()
    } else {
        1.0
    }
}

fn report_cells(r: &EnergyReport, k: f64) -> Vec<Cell> {
    vec![
        (r.energy * k).into(),
        (r.ergotropy * k).into(),
        (r.ergotropy_incoherent * k).into(),
        (r.ergotropy_coherent * k).into(),
    ]
}

fn report_columns(normalize: bool) -> Vec<String> {
    ["E", "ergotropy", "ergotropy_incoherent", "ergotropy_coherent"]
        .iter()
        .map(|c| energy_column(c, normalize))
        .collect()
}

fn time_cells(p: &ModelParams, t: f64) -> [Cell; 2] {
    [(p.g * t).into(), (p.gamma * t).into()]
}

/// Per-point columns of a computation.
fn point_columns(target: Mode, normalize: bool) -> Vec<String> {
    let e = |c: &str| energy_column(c, normalize);
    match target {
        Mode::SteadyAnalytic | Mode::SteadyNumeric => {
            let mut v = vec!["sigma_z".to_string(), "ratio".to_string()];
            v.extend(report_columns(normalize));
            v
        }
        Mode::ChargingTime => vec!["g_T".into(), "gamma_T".into(), e("E_inf"), e("threshold")],
        Mode::Trajectories => vec![e("E"), e("E_sem"), e("ergotropy"), e("ergotropy_sem"), e("E_dispersion")],
        Mode::Evolve | Mode::Sweep => unreachable!("not a point computation"),
    }
}

/// Steady state from the closed form.
pub fn steady_analytic_point(p: &ModelParams, normalize: bool, diag: &mut Diagnostics) -> Result<Vec<Cell>> {
    let s = steady_battery_analytic(p)?;
    let k = scale(p, normalize);
    let min = s.populations.iter().cloned().fold(f64::INFINITY, f64::min);
    diag.eigenvalue(min);
    Ok(vec![
        s.sigma_z.into(),
        s.ratio.into(),
        (s.energy * k).into(),
        (s.ergotropy * k).into(),
        (s.ergotropy * k).into(),
        0.0.into(),
    ])
}

/// Steady state from the Liouvillian null space.
pub fn steady_numeric_point(p: &ModelParams, normalize: bool, diag: &mut Diagnostics) -> Result<Vec<Cell>> {
    let ss = steady_state_with(p, &SteadyOptions::default())?;
    diag.merge(&Diagnostics {
        max_steady_residual: Some(ss.residual),
        min_steady_gap: Some(ss.gap),
        positivity_repairs: ss.repairs,
        min_eigenvalue: Some(ss.raw_min_eigenvalue),
        ..Diagnostics::default()
    });
    let sz = ss.state.expect(&JointOperators::new(p.d)?.sigma_z)?.re;
    let report = battery_report(&ss.state, p.omega0)?;
    let mut row = vec![sz.into(), ((1.0 + sz) / (1.0 - sz)).into()];
    row.extend(report_cells(&report, scale(p, normalize)));
    Ok(row)
}

fn charging_point(
    cfg: &ExperimentConfig,
    p: &ModelParams,
    diag: &mut Diagnostics,
) -> Result<Vec<Cell>> {
    let mut opts = ChargingOptions::for_params(p);
    if let Some(t) = cfg.charging.t_max {
        opts.t_max = t;
    }
    let rho0 = cfg.initial.state(p.d)?;
    let ct = charging_time_with(p, cfg.charging.epsilon, &rho0, &opts)?;
    diag.merge(&Diagnostics {
        max_steady_residual: Some(ct.steady_residual),
        min_eigenvalue: Some(ct.min_eigenvalue),
        ..Diagnostics::default()
    });
    let k = scale(p, cfg.normalize);
    Ok(vec![
        (p.g * ct.time).into(),
        (p.gamma * ct.time).into(),
        (ct.asymptotic_energy * k).into(),
        (ct.threshold * k).into(),
    ])
}

fn ensemble(cfg: &ExperimentConfig, p: &ModelParams, s: &SimulationParams, diag: &mut Diagnostics) -> Result<EnsembleResult> {
    let rho0 = cfg.initial.state(p.d)?;
    let e = run_ensemble(p, s, &rho0)?;
    diag.merge(&Diagnostics {
        min_eigenvalue: Some(e.min_eigenvalue),
        trajectories: e.n_traj,
        ..Diagnostics::default()
    });
    Ok(e)
}

fn trajectory_point(
    cfg: &ExperimentConfig,
    p: &ModelParams,
    s: &SimulationParams,
    diag: &mut Diagnostics,
) -> Result<Vec<Cell>> {
    let e = ensemble(cfg, p, s, diag)?;
    let from = cfg.sim.average_from.unwrap_or(0.5 * s.t_max);
    let w = e.window_average(from)?;
    let k = scale(p, cfg.normalize);
    Ok(vec![
        (w.energy * k).into(),
        (w.energy_sem * k).into(),
        (w.ergotropy * k).into(),
        (w.ergotropy_sem * k).into(),
        (w.dispersion * k).into(),
    ])
}

fn compute_point(
    cfg: &ExperimentConfig,
    p: &ModelParams,
    s: &SimulationParams,
    diag: &mut Diagnostics,
) -> Result<Vec<Cell>> {
    match cfg.target() {
        Mode::SteadyAnalytic => steady_analytic_point(p, cfg.normalize, diag),
        Mode::SteadyNumeric => steady_numeric_point(p, cfg.normalize, diag),
        Mode::ChargingTime => charging_point(cfg, p, diag),
        Mode::Trajectories => trajectory_point(cfg, p, s, diag),
        Mode::Evolve | Mode::Sweep => unreachable!("not a point computation"),
    }
}

/// Runs `f` on every item in parallel and returns results in input order.
pub(crate) fn ordered_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T, &mut Diagnostics) -> Result<R> + Sync,
) -> Result<(Vec<R>, Diagnostics)> {
    let results: Vec<Result<(R, Diagnostics)>> = items
        .par_iter()
        .map(|it| {
            let mut d = Diagnostics::default();
            f(it, &mut d).map(|r| (r, d))
        })
        .collect();
    let mut diag = Diagnostics::default();
    let mut out = Vec::with_capacity(items.len());
    for r in results {
        let (v, d) = r?;
        diag.merge(&d);
        out.push(v);
    }
    Ok((out, diag))
}

fn evolve_table(cfg: &ExperimentConfig, diag: &mut Diagnostics) -> Result<Table> {
    let (p, s) = cfg.base()?;
    let (times, reports) = evolve_reports(&p, &cfg.initial.state(p.d)?, s.t_max, cfg.sim.samples, diag)?;
    let mut header = vec!["g_t".to_string(), "gamma_t".to_string()];
    header.extend(report_columns(cfg.normalize));
    let mut t = Table::new(header);
    let k = scale(&p, cfg.normalize);
    for (time, rep) in times.iter().zip(&reports) {
        let mut row = time_cells(&p, *time).to_vec();
        row.extend(report_cells(rep, k));
        t.push(row);
    }
    Ok(t)
}

/// Ensemble table and the per-trajectory fan for a trajectory run.
pub fn ensemble_tables(
    p: &ModelParams,
    e: &EnsembleResult,
    normalize: bool,
    fan: usize,
) -> (Table, Table) {
    let k = scale(p, normalize);
    let mut header = vec!["g_t".to_string(), "gamma_t".to_string()];
    header.extend(report_columns(normalize));
    header.extend(["E_std", "E_sem", "ergotropy_sem"].iter().map(|c| energy_column(c, normalize)));
    let mut t = Table::new(header);
    for (i, &time) in e.times.iter().enumerate() {
        let mut row = time_cells(p, time).to_vec();
        row.extend(report_cells(&e.reports[i], k));
        row.extend([e.energy_std[i] * k, e.energy_sem[i] * k, e.ergotropy_sem[i] * k].map(Cell::from));
        t.push(row);
    }
    let mut f = Table::new([
        "trajectory".to_string(),
        "g_t".to_string(),
        "gamma_t".to_string(),
        energy_column("E", normalize),
        energy_column("ergotropy", normalize),
    ]);
    for j in 0..fan.min(e.n_traj) {
        for (i, &time) in e.times.iter().enumerate() {
            let mut row = vec![Cell::from(j)];
            row.extend(time_cells(p, time));
            row.extend([e.trajectory_energies[j][i] * k, e.trajectory_ergotropies[j][i] * k].map(Cell::from));
            f.push(row);
        }
    }
    (t, f)
}

/// Runs a validated configuration without writing anything.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunResult> {
    let mut diag = Diagnostics::default();
    let outputs = match cfg.mode {
        Mode::Evolve => vec![Output {
            stem: cfg.output.clone(),
            table: evolve_table(cfg, &mut diag)?,
        }],
        Mode::Trajectories => {
            let (p, s) = cfg.base()?;
            let e = ensemble(cfg, &p, &s, &mut diag)?;
            let (t, f) = ensemble_tables(&p, &e, cfg.normalize, cfg.sim.fan);
            let mut out = vec![Output {
                stem: cfg.output.clone(),
                table: t,
            }];
            if cfg.sim.fan > 0 {
                out.push(Output {
                    stem: format!("{}_trajectories", cfg.output),
                    table: f,
                });
            }
            out
        }
        _ => {
            let points = cfg.points()?;
            let (rows, d) = ordered_map(&points, |(_, p, s), d| compute_point(cfg, p, s, d))?;
            diag.merge(&d);
            let mut header = Vec::new();
            if let Some(sw) = &cfg.sweep {
                header.push(sw.axis.name().to_string());
            }
            header.extend(point_columns(cfg.target(), cfg.normalize));
            let mut t = Table::new(header);
            for ((v, _, _), row) in points.iter().zip(rows) {
                let mut full = Vec::new();
                if cfg.sweep.is_some() {
                    full.push(Cell::Float(*v));
                }
                full.extend(row);
                t.push(full);
            }
            vec![Output {
                stem: cfg.output.clone(),
                table: t,
            }]
        }
    };
    #[derive(Serialize)]
    struct Resolved<'a> {
        config: &'a ExperimentConfig,
        model: ModelParams,
        sim: Option<SimulationParams>,
    }
    let (p, s) = cfg.base()?;
    let timed = matches!(cfg.target(), Mode::Trajectories | Mode::Evolve);
    let resolved = serde_json::to_value(Resolved {
        config: cfg,
        model: p,
        sim: timed.then_some(s),
    })
    .expect("config serializes");
    Ok(RunResult {
        run: cfg.mode.name().to_string(),
        outputs,
        diagnostics: diag,
        resolved,
        seed: cfg.sim.seed,
        efficiency_rule: cfg.model.efficiency_rule(),
    })
}

/// Writes each output as CSV with a manifest beside it; returns the paths
/// written.
pub fn write_outputs(
    result: &RunResult,
    config_text: Option<&str>,
    out_dir: &Path,
    started: Instant,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let names: Vec<String> = result.outputs.iter().map(|o| format!("{}.csv", o.stem)).collect();
    let mut written = Vec::new();
    for (o, name) in result.outputs.iter().zip(&names) {
        let path = out_dir.join(name);
        write_csv(&o.table, &path)?;
        written.push(path);
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        run: result.run.clone(),
        config_text: config_text.map(String::from),
        resolved: result.resolved.clone(),
        seed: result.seed,
        efficiency_rule: result.efficiency_rule.clone(),
        threads: rayon::current_num_threads(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        outputs: names,
        diagnostics: result.diagnostics,
    };
    for o in &result.outputs {
        let path = out_dir.join(format!("{}.manifest.json", o.stem));
        manifest.write(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Checks that every sampled state of a run stayed physical.
pub fn check_diagnostics(d: &Diagnostics, tolerance: f64) -> Result<()> {
    if let Some(m) = d.min_eigenvalue {
        if m < -tolerance {
            return Err(Error::InvariantViolation {
                time: f64::NAN,
                reason: format!("minimum eigenvalue {m:.3e} below −{tolerance:.0e}"),
            });
        }
    }
    Ok(())
}

/// Evolution helper shared with presets: E and ℰ of the mean state on a
/// uniform grid.
pub(crate) fn evolve_reports(
    p: &ModelParams,
    rho0: &DensityMatrix,
    t_max: f64,
    samples: usize,
    diag: &mut Diagnostics,
) -> Result<(Vec<f64>, Vec<EnergyReport>)> {
    let r = evolve_master_equation(p, rho0, t_max, &uniform_samples(t_max, samples))?;
    diag.eigenvalue(r.min_eigenvalue);
    diag.integrator_steps += r.steps;
    Ok((r.times, r.reports))
}
