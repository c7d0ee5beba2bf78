//! Delayed feedback: steady energy, ergotropy and trajectory spread for a
//! few loop delays.

use qcharge::model::ModelParams;
use qcharge::quantum::DensityMatrix;
use qcharge::trajectory::{run_ensemble, SimulationParams};

fn main() -> qcharge::Result<()> {
    let p = ModelParams { d: 6, gamma: 5.0, f: 5.0, ..ModelParams::default().with_efficiency(0.7) };
    let rho0 = DensityMatrix::basis(p.d, vec![2, p.d])?;
    let dt = 5e-3 / p.gamma;
    println!("{:>5} {:>8} {:>8} {:>8} {:>8} {:>10}", "Γτ", "E", "±", "ℰ", "±", "spread");
    for gamma_tau in [0.0, 0.1, 0.25, 0.5] {
        let s = SimulationParams {
            dt,
            t_max: 30.0,
            tau: gamma_tau / p.gamma,
            n_traj: 100,
            seed: 3,
            sample_stride: (0.5 / dt).round() as usize,
        };
        let w = run_ensemble(&p, &s, &rho0)?.window_average(20.0)?;
        println!(
            "{gamma_tau:5.2} {:8.4} {:8.4} {:8.4} {:8.4} {:10.4}",
            w.energy, w.energy_sem, w.ergotropy, w.ergotropy_sem, w.dispersion
        );
    }
    Ok(())
}
