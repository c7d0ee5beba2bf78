//! The same charger feeding ladders of different length.

use qcharge::model::ModelParams;
use qcharge::quantum::DensityMatrix;
use qcharge::steady::{evolve_master_equation, steady_battery_analytic, uniform_samples};

fn main() -> qcharge::Result<()> {
    let dims = [10, 15, 20];
    let times = uniform_samples(40.0, 8);
    let mut curves = Vec::new();
    for d in dims {
        let p = ModelParams { d, ..ModelParams::default().with_efficiency(0.5) };
        let rho0 = DensityMatrix::basis(d, vec![2, d])?;
        curves.push(evolve_master_equation(&p, &rho0, 40.0, &times)?.energies());
        println!("d = {d:2}: E(∞) = {:.4}", steady_battery_analytic(&p)?.energy);
    }
    println!("\n{:>5} {:>9} {:>9} {:>9}", "g·t", "d=10", "d=15", "d=20");
    for (k, t) in times.iter().enumerate() {
        println!("{t:5.1} {:9.4} {:9.4} {:9.4}", curves[0][k], curves[1][k], curves[2][k]);
    }
    Ok(())
}
