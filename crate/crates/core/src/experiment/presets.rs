//! Preset studies, one per figure of the charging study.
//!
//! Every preset starts from [`ModelParams::default`] and changes only what
//! the figure varies. Column layouts are listed in the README.

use serde_json::json;

use super::csv::{Cell, Table};
use super::manifest::Diagnostics;
use super::runner::{
    ensemble_tables, evolve_reports, ordered_map, steady_analytic_point, steady_numeric_point,
    Output, RunResult,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::DensityMatrix;
use crate::steady::{charging_time_with, evolve_master_equation, optimal_feedback_gain, ChargingOptions};
use crate::trajectory::{run_ensemble, SimulationParams, DEFAULT_GAMMA_DT};

/// Preset names with a one-line description.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", "steady energy and ergotropy against f/Γ for η = 1 and η = 0.3 (closed form)"),
    ("fig3", "coherent strategy: steady state against Ω₀ for f/Γ ∈ {0, −0.2, −0.45}, Γ = 10g"),
    ("fig4", "500 trajectories with f = Γ = g, η = 0.3, plus the master-equation curve"),
    ("fig5", "charging time against Γ = f for η ∈ {0.3, 0.7, 1}"),
    ("fig6", "delayed feedback Γτ = 0.1, f = Γ = 5g, η = 0.7, d = 10"),
    ("fig7", "steady energy and ergotropy against Γτ for η ∈ {1, 0.7} (long)"),
    ("fig8", "charging dynamics for d ∈ {10, 15, 20}, f = Γ = g, η = 0.5"),
    ("fig9", "steady charge against n̄ at the optimal gain, η_c = η_d = 0.7"),
    ("fig10", "charging dynamics with detuning or thermal noise, Γ = 2g, optimal gain"),
];

/// Fan size of the trajectory presets.
pub const FAN: usize = 40;

#[derive(Clone, Copy, Debug, Default)]
pub struct PresetOptions {
    pub seed: u64,
    /// Overrides the ensemble size of trajectory presets.
    pub n_traj: Option<usize>,
}

/// Γ/g grid of the charging-time preset.
pub const FIG5_GAMMA_OVER_G: [f64; 12] = [0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 7.0, 10.0];
/// Γτ grid of the delay preset.
pub const FIG7_GAMMA_TAU: [f64; 7] = [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];

fn with_eta(p: ModelParams, eta: f64) -> ModelParams {
    ModelParams {
        eta_c: eta.sqrt(),
        eta_d: eta.sqrt(),
        ..p
    }
}

fn ground(p: &ModelParams) -> Result<DensityMatrix> {
    DensityMatrix::basis(p.d, vec![2, p.d])
}

fn result(name: &str, outputs: Vec<Output>, diagnostics: Diagnostics, resolved: serde_json::Value, seed: u64) -> RunResult {
    RunResult {
        run: format!("preset {name}"),
        outputs,
        diagnostics,
        resolved,
        seed,
        efficiency_rule: "eta_c = eta_d = sqrt(eta) unless both are given".into(),
    }
}

fn output(stem: &str, table: Table) -> Output {
    Output {
        stem: stem.to_string(),
        table,
    }
}

pub fn run_preset(name: &str, opts: &PresetOptions) -> Result<RunResult> {
    match name {
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4" => trajectory_preset("fig4", fig4_params(), 40.0, 0.0, DEFAULT_GAMMA_DT, opts),
        "fig5" => fig5(),
        "fig6" => trajectory_preset("fig6", fig6_params(0.7), 100.0, 0.1, DEFAULT_GAMMA_DT, opts),
        "fig7" => fig7(opts),
        "fig8" => fig8(),
        "fig9" => fig9(),
        "fig10" => fig10(),
        _ => Err(Error::config(
            "preset",
            format!(
                "unknown preset `{name}`; available: {}",
                PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
            ),
        )),
    }
}

/// Population-inversion strategy: steady E and ℰ against f/Γ.
pub fn fig2() -> Result<RunResult> {
    let base = ModelParams::default();
    let etas = [1.0, 0.3];
    let points: Vec<(f64, f64)> = etas
        .iter()
        .flat_map(|&eta| (0..=80).map(move |i| (eta, i as f64 / 40.0)))
        .collect();
    let (rows, diag) = ordered_map(&points, |&(eta, x), d| {
        let p = ModelParams {
            f: x * base.gamma,
            ..with_eta(base, eta)
        };
        steady_analytic_point(&p, true, d)
    })?;
    let mut t = Table::new(["f_over_gamma", "eta", "E_over_Emax", "ergotropy_over_Emax"]);
    for (&(eta, x), row) in points.iter().zip(rows) {
        t.push(vec![x.into(), eta.into(), row[2], row[3]]);
    }
    let resolved = json!({ "base": base, "eta": etas, "f_over_gamma": "i/40, i = 0..=80", "method": "closed form" });
    Ok(result("fig2", vec![output("fig2", t)], diag, resolved, 0))
}

/// Γ = 10g and a drive sweep of 81 points over [0, 4g].
pub fn fig3_params(f_over_gamma: f64, drive_over_g: f64) -> ModelParams {
    let base = ModelParams::default();
    let gamma = 10.0 * base.g;
    ModelParams {
        gamma,
        f: f_over_gamma * gamma,
        drive: drive_over_g * base.g,
        ..base
    }
}

pub const FIG3_F_OVER_GAMMA: [f64; 3] = [0.0, -0.2, -0.45];

pub fn fig3_drive_grid() -> Vec<f64> {
    (0..=80).map(|i| 4.0 * i as f64 / 80.0).collect()
}

pub fn fig3() -> Result<RunResult> {
    let points: Vec<(f64, f64)> = FIG3_F_OVER_GAMMA
        .iter()
        .flat_map(|&f| fig3_drive_grid().into_iter().map(move |w| (f, w)))
        .collect();
    let (rows, diag) = ordered_map(&points, |&(f, w), d| steady_numeric_point(&fig3_params(f, w), true, d))?;
    let mut t = Table::new([
        "f_over_gamma",
        "drive_over_g",
        "E_over_Emax",
        "ergotropy_over_Emax",
        "ergotropy_incoherent_over_Emax",
        "ergotropy_coherent_over_Emax",
    ]);
    for (&(f, w), row) in points.iter().zip(rows) {
        let mut full = vec![f.into(), w.into()];
        full.extend_from_slice(&row[2..]);
        t.push(full);
    }
    let resolved = json!({
        "base": fig3_params(0.0, 0.0),
        "f_over_gamma": FIG3_F_OVER_GAMMA,
        "drive_over_g": "4i/80, i = 0..=80",
        "method": "Liouvillian null space",
    });
    Ok(result("fig3", vec![output("fig3", t)], diag, resolved, 0))
}

pub fn fig4_params() -> ModelParams {
    ModelParams::default()
}

/// f = Γ = 5g, Ω₀ = 0, d = 10 at efficiency `eta`.
pub fn fig6_params(eta: f64) -> ModelParams {
    let base = ModelParams::default();
    let gamma = 5.0 * base.g;
    ModelParams {
        gamma,
        f: gamma,
        d: 10,
        ..with_eta(base, eta)
    }
}

/// Ensemble with per-trajectory fan and the τ = 0 master-equation curve.
fn trajectory_preset(
    name: &str,
    p: ModelParams,
    g_t_max: f64,
    gamma_tau: f64,
    gamma_dt: f64,
    opts: &PresetOptions,
) -> Result<RunResult> {
    let t_max = g_t_max / p.g;
    let dt = gamma_dt / p.gamma;
    let n_steps = (t_max / dt).round() as usize;
    let s = SimulationParams {
        dt,
        t_max,
        tau: gamma_tau / p.gamma,
        n_traj: opts.n_traj.unwrap_or(500),
        seed: opts.seed,
        sample_stride: n_steps / 400,
    };
    let rho0 = ground(&p)?;
    let e = run_ensemble(&p, &s, &rho0)?;
    let mut diag = Diagnostics {
        min_eigenvalue: Some(e.min_eigenvalue),
        trajectories: e.n_traj,
        ..Diagnostics::default()
    };
    let me = evolve_master_equation(&p, &rho0, *e.times.last().unwrap(), &e.times)?;
    diag.eigenvalue(me.min_eigenvalue);
    diag.integrator_steps += me.steps;

    let (mut t, fan) = ensemble_tables(&p, &e, true, FAN);
    t.header.push("E_master_over_Emax".into());
    t.header.push("ergotropy_master_over_Emax".into());
    for (row, rep) in t.rows.iter_mut().zip(&me.reports) {
        row.push((rep.energy / p.e_max()).into());
        row.push((rep.ergotropy / p.e_max()).into());
    }
    let resolved = json!({ "model": p, "sim": s, "initial": "ground", "markovian_reference": "tau = 0 master equation" });
    Ok(result(
        name,
        vec![output(name, t), output(&format!("{name}_trajectories"), fan)],
        diag,
        resolved,
        opts.seed,
    ))
}

/// f = Γ, at Γ = x·g and efficiency η.
pub fn fig5_params(eta: f64, gamma_over_g: f64) -> ModelParams {
    let base = ModelParams::default();
    let gamma = gamma_over_g * base.g;
    ModelParams {
        gamma,
        f: gamma,
        ..with_eta(base, eta)
    }
}

pub const FIG5_ETA: [f64; 3] = [0.3, 0.7, 1.0];

pub fn fig5() -> Result<RunResult> {
    let points: Vec<(f64, f64)> = FIG5_ETA
        .iter()
        .flat_map(|&eta| FIG5_GAMMA_OVER_G.iter().map(move |&x| (eta, x)))
        .collect();
    let (rows, diag) = ordered_map(&points, |&(eta, x), d| {
        let p = fig5_params(eta, x);
        let ct = charging_time_with(&p, 1e-2, &ground(&p)?, &ChargingOptions::for_params(&p))?;
        d.merge(&Diagnostics {
            max_steady_residual: Some(ct.steady_residual),
            min_eigenvalue: Some(ct.min_eigenvalue),
            ..Diagnostics::default()
        });
        Ok(ct.time)
    })?;
    let mut t = Table::new(["eta", "gamma_over_g", "g_T", "gamma_T"]);
    for (&(eta, x), time) in points.iter().zip(rows) {
        let p = fig5_params(eta, x);
        t.push(vec![eta.into(), x.into(), (p.g * time).into(), (p.gamma * time).into()]);
    }
    let resolved = json!({ "base": fig5_params(0.3, 1.0), "eta": FIG5_ETA, "gamma_over_g": FIG5_GAMMA_OVER_G, "epsilon": 1e-2 });
    Ok(result("fig5", vec![output("fig5", t)], diag, resolved, 0))
}

pub fn fig7(opts: &PresetOptions) -> Result<RunResult> {
    let etas = [1.0, 0.7];
    let (g_t_max, g_t_from, gamma_dt) = (150.0, 100.0, 5e-3);
    let mut t = Table::new([
        "eta",
        "gamma_tau",
        "E_over_Emax",
        "E_sem_over_Emax",
        "ergotropy_over_Emax",
        "ergotropy_sem_over_Emax",
        "E_dispersion_over_Emax",
    ]);
    let mut diag = Diagnostics::default();
    let mut sims = Vec::new();
    for eta in etas {
        let p = fig6_params(eta);
        for gamma_tau in FIG7_GAMMA_TAU {
            let s = delay_sim(&p, g_t_max, gamma_tau, gamma_dt, opts);
            let e = run_ensemble(&p, &s, &ground(&p)?)?;
            diag.merge(&Diagnostics {
                min_eigenvalue: Some(e.min_eigenvalue),
                trajectories: e.n_traj,
                ..Diagnostics::default()
            });
            let w = e.window_average(g_t_from / p.g)?;
            let k = 1.0 / p.e_max();
            t.push(
                [eta, gamma_tau, w.energy * k, w.energy_sem * k, w.ergotropy * k, w.ergotropy_sem * k, w.dispersion * k]
                    .map(Cell::from)
                    .to_vec(),
            );
            sims.push(s);
        }
    }
    let resolved = json!({
        "models": etas.map(fig6_params),
        "sims": sims,
        "gamma_tau": FIG7_GAMMA_TAU,
        "average_from_g_t": g_t_from,
    });
    Ok(result("fig7", vec![output("fig7", t)], diag, resolved, opts.seed))
}

/// Simulation settings for a delay study at Γτ with samples every 0.5/g.
pub fn delay_sim(p: &ModelParams, g_t_max: f64, gamma_tau: f64, gamma_dt: f64, opts: &PresetOptions) -> SimulationParams {
    let dt = gamma_dt / p.gamma;
    let t_max = g_t_max / p.g;
    SimulationParams {
        dt,
        t_max,
        tau: gamma_tau / p.gamma,
        n_traj: opts.n_traj.unwrap_or(500),
        seed: opts.seed,
        sample_stride: ((0.5 / p.g) / dt).round() as usize,
    }
}

/// f = Γ = g, η = 0.5, battery dimension `d`.
pub fn fig8_params(d: usize) -> ModelParams {
    ModelParams {
        d,
        ..with_eta(ModelParams::default(), 0.5)
    }
}

pub const FIG8_D: [usize; 3] = [10, 15, 20];

pub fn fig8() -> Result<RunResult> {
    let g_t_max = 80.0;
    let (rows, diag) = ordered_map(&FIG8_D, |&d, diag| {
        let p = fig8_params(d);
        evolve_reports(&p, &ground(&p)?, g_t_max / p.g, 320, diag)
    })?;
    let mut t = Table::new(["d", "g_t", "gamma_t", "E", "ergotropy"]);
    for (&d, (times, reps)) in FIG8_D.iter().zip(rows) {
        let p = fig8_params(d);
        for (time, r) in times.iter().zip(reps) {
            t.push(vec![d.into(), (p.g * time).into(), (p.gamma * time).into(), r.energy.into(), r.ergotropy.into()]);
        }
    }
    let resolved = json!({ "models": FIG8_D.map(fig8_params), "g_t_max": g_t_max, "samples": 320 });
    Ok(result("fig8", vec![output("fig8", t)], diag, resolved, 0))
}

/// η_c = η_d = 0.7, f = f*(n̄).
pub fn fig9_params(nbar: f64) -> Result<ModelParams> {
    let p = ModelParams {
        nbar,
        eta_c: 0.7,
        eta_d: 0.7,
        ..ModelParams::default()
    };
    Ok(ModelParams {
        f: optimal_feedback_gain(&p)?,
        ..p
    })
}

pub fn fig9() -> Result<RunResult> {
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 / 10.0).collect();
    let (rows, diag) = ordered_map(&grid, |&n, d| {
        let p = fig9_params(n)?;
        let row = steady_analytic_point(&p, true, d)?;
        Ok((p.f / p.gamma, row))
    })?;
    let mut t = Table::new(["nbar", "f_over_gamma", "E_over_Emax", "ergotropy_over_Emax"]);
    for (&n, (f, row)) in grid.iter().zip(rows) {
        t.push(vec![n.into(), f.into(), row[2], row[3]]);
    }
    let resolved = json!({ "base": fig9_params(0.0)?, "nbar": "i/10, i = 0..=30", "f": "optimal", "method": "closed form" });
    Ok(result("fig9", vec![output("fig9", t)], diag, resolved, 0))
}

/// Γ = 2g, η_c = η_d = 0.7, f = f*, with detuning Δ_B and occupation n̄.
pub fn fig10_params(delta_over_g: f64, nbar: f64) -> Result<ModelParams> {
    let base = ModelParams::default();
    let p = ModelParams {
        gamma: 2.0 * base.g,
        delta_b: delta_over_g * base.g,
        nbar,
        eta_c: 0.7,
        eta_d: 0.7,
        ..base
    };
    Ok(ModelParams {
        f: optimal_feedback_gain(&p)?,
        ..p
    })
}

pub const FIG10_CASES: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)];

pub fn fig10() -> Result<RunResult> {
    let g_t_max = 150.0;
    let (rows, diag) = ordered_map(&FIG10_CASES, |&(delta, nbar), diag| {
        let p = fig10_params(delta, nbar)?;
        evolve_reports(&p, &ground(&p)?, g_t_max / p.g, 300, diag)
    })?;
    let mut t = Table::new(["delta_b_over_g", "nbar", "g_t", "gamma_t", "E_over_Emax", "ergotropy_over_Emax"]);
    for (&(delta, nbar), (times, reps)) in FIG10_CASES.iter().zip(rows) {
        let p = fig10_params(delta, nbar)?;
        for (time, r) in times.iter().zip(reps) {
            t.push(
                [delta, nbar, p.g * time, p.gamma * time, r.energy / p.e_max(), r.ergotropy / p.e_max()]
                    .map(Cell::from)
                    .to_vec(),
            );
        }
    }
    let models = FIG10_CASES
        .iter()
        .map(|&(a, b)| fig10_params(a, b))
        .collect::<Result<Vec<_>>>()?;
    let resolved = json!({ "models": models, "g_t_max": g_t_max, "samples": 300 });
    Ok(result("fig10", vec![output("fig10", t)], diag, resolved, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_rows_at_the_optimum() {
        let r = fig2().unwrap();
        let t = &r.outputs[0].table;
        assert_eq!(t.header, ["f_over_gamma", "eta", "E_over_Emax", "ergotropy_over_Emax"]);
        assert_eq!(t.rows.len(), 162);
        let find = |eta: f64| {
            t.rows
                .iter()
                .find(|row| row[0].as_f64() == 1.0 && row[1].as_f64() == eta)
                .unwrap()
                .iter()
                .map(Cell::as_f64)
                .collect::<Vec<_>>()
        };
        assert_eq!(find(1.0), [1.0, 1.0, 1.0, 1.0]);
        let r3 = find(0.3);
        // R = 10/7, d = 20 evaluated directly
        let q: f64 = 10.0 / 7.0;
        let z: f64 = (0..20).map(|n| q.powi(n)).sum();
        let mean: f64 = (0..20).map(|n| n as f64 * q.powi(n)).sum::<f64>() / z;
        assert!((r3[2] - mean / 19.0).abs() < 1e-12);
        assert!((r3[2] - 0.878).abs() < 1e-3);
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        let e = run_preset("fig99", &PresetOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn fig9_is_monotone_in_temperature() {
        let r = fig9().unwrap();
        let t = &r.outputs[0].table;
        let e = t.column("E_over_Emax").unwrap();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(t.column("f_over_gamma").unwrap()[0], 1.0);
    }
}
