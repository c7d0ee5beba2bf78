//! Time to reach 99% of the asymptotic energy as the charger's decay rate
//! is varied with f = Γ.

use qcharge::model::ModelParams;
use qcharge::quantum::DensityMatrix;
use qcharge::steady::{charging_time_with, ChargingOptions};

fn main() -> qcharge::Result<()> {
    let base = ModelParams { d: 10, ..ModelParams::default() };
    println!("{:>5} {:>6} {:>10} {:>10} {:>8}", "η", "Γ/g", "g·T", "Γ·T", "E(∞)");
    for eta in [0.7, 1.0] {
        for x in [0.5, 1.0, 2.0, 5.0] {
            let p = ModelParams { gamma: x, f: x, ..base.with_efficiency(eta) };
            let rho0 = DensityMatrix::basis(p.d, vec![2, p.d])?;
            let ct = charging_time_with(&p, 1e-2, &rho0, &ChargingOptions::for_params(&p))?;
            println!("{eta:5.2} {x:6.2} {:10.3} {:10.3} {:8.4}", p.g * ct.time, p.gamma * ct.time, ct.asymptotic_energy);
        }
    }
    Ok(())
}
