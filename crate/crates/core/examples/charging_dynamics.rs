//! Charging from the empty battery: the averaged dynamics against a small
//! ensemble of monitored trajectories.

use qcharge::model::ModelParams;
use qcharge::quantum::DensityMatrix;
use qcharge::steady::evolve_master_equation;
use qcharge::trajectory::{run_ensemble, run_trajectory, SimulationParams};

fn main() -> qcharge::Result<()> {
    let p = ModelParams { d: 10, ..ModelParams::default() }; // f = Γ = g, η = 0.3
    let rho0 = DensityMatrix::basis(p.d, vec![2, p.d])?;
    let dt = 1e-3 / p.gamma;
    let s = SimulationParams {
        n_traj: 64,
        seed: 1,
        sample_stride: (2.0 / dt).round() as usize,
        ..SimulationParams::new(&p, 20.0)
    };
    let ens = run_ensemble(&p, &s, &rho0)?;
    let me = evolve_master_equation(&p, &rho0, s.t_max, &ens.times)?;

    println!("{:>5} {:>9} {:>9} {:>9} {:>9}", "g·t", "E_ME", "E_ens", "±SE", "ℰ_ens");
    for (k, t) in ens.times.iter().enumerate() {
        println!(
            "{t:5.1} {:9.4} {:9.4} {:9.4} {:9.4}",
            me.reports[k].energy, ens.reports[k].energy, ens.energy_sem[k], ens.reports[k].ergotropy
        );
    }

    // one trajectory with its measured current
    let one = run_trajectory(&p, &SimulationParams { sample_stride: 4000, ..s }, &rho0, 0)?;
    let mean_r = one.record.iter().sum::<f64>() / one.record.len() as f64;
    println!("\ntrajectory 0: final E = {:.4}, mean current {mean_r:.4}", one.battery_energy.last().unwrap());
    Ok(())
}
