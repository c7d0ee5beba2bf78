//! Coherent strategy: a constant drive Ω₀ with negative feedback gain.
//! The ergotropy that appears is almost entirely coherent.

use qcharge::energetics::battery_report;
use qcharge::model::ModelParams;
use qcharge::steady::steady_state_numeric;

fn main() -> qcharge::Result<()> {
    let base = ModelParams { gamma: 10.0, ..ModelParams::default() }; // Γ = 10g, η = 0.3
    for x in [0.0, -0.45] {
        println!("f = {x}Γ");
        println!("{:>6} {:>9} {:>9} {:>11} {:>11}", "Ω₀/g", "E/Emax", "ℰ/Emax", "ℰ_c/Emax", "ℰ_i/Emax");
        for k in 0..=8 {
            let drive = 0.5 * k as f64;
            let p = ModelParams { f: x * base.gamma, drive, ..base };
            let r = battery_report(&steady_state_numeric(&p)?, p.omega0)?.normalized();
            println!(
                "{drive:6.2} {:9.5} {:9.5} {:11.5} {:11.2e}",
                r.energy, r.ergotropy, r.ergotropy_coherent, r.ergotropy_incoherent
            );
        }
    }
    Ok(())
}
