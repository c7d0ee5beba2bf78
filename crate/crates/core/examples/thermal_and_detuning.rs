//! Thermal noise on the lost fluorescence and battery detuning.

use qcharge::energetics::battery_report;
use qcharge::model::ModelParams;
use qcharge::quantum::DensityMatrix;
use qcharge::steady::{
    charging_time_with, optimal_feedback_gain, steady_battery_analytic, steady_state_numeric,
    ChargingOptions,
};

fn main() -> qcharge::Result<()> {
    let base = ModelParams { d: 10, gamma: 2.0, eta_c: 0.7, eta_d: 0.7, ..ModelParams::default() };

    println!("{:>4} {:>8} {:>9} {:>9}", "n̄", "f*/Γ", "E/Emax", "ℰ/Emax");
    for nbar in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let p = ModelParams { nbar, ..base };
        let p = ModelParams { f: optimal_feedback_gain(&p)?, ..p };
        let s = steady_battery_analytic(&p)?;
        println!("{nbar:4.1} {:8.4} {:9.5} {:9.5}", p.f / p.gamma, s.energy / p.e_max(), s.ergotropy / p.e_max());
    }

    let p = ModelParams { f: optimal_feedback_gain(&base)?, ..base };
    let rho0 = DensityMatrix::basis(p.d, vec![2, p.d])?;
    println!("\n{:>6} {:>10} {:>10}", "Δ_B/g", "E(∞)", "g·T");
    for delta in [0.0, 0.5, 1.0, 2.0] {
        let q = ModelParams { delta_b: delta * p.g, ..p };
        let e = battery_report(&steady_state_numeric(&q)?, q.omega0)?.energy;
        let ct = charging_time_with(&q, 1e-2, &rho0, &ChargingOptions::for_params(&q))?;
        println!("{delta:6.2} {e:10.6} {:10.3}", q.g * ct.time);
    }
    Ok(())
}
