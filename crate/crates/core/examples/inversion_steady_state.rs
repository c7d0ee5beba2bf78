//! Steady charge under the population-inversion strategy (no constant
//! drive): closed form against the Liouvillian null space.

use qcharge::energetics::battery_report;
use qcharge::model::ModelParams;
use qcharge::steady::{steady_battery_analytic, steady_state_numeric};

fn main() -> qcharge::Result<()> {
    let base = ModelParams::default();
    println!("{:>6} {:>5} {:>8} {:>10} {:>10} {:>10}", "f/Γ", "η", "R", "E/Emax", "ℰ/Emax", "T_v/ω₀");
    for eta in [1.0, 0.7, 0.3] {
        for x in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0] {
            let p = ModelParams { f: x * base.gamma, ..base.with_efficiency(eta) };
            let s = steady_battery_analytic(&p)?;
            let tv = s
                .virtual_temperature(p.omega0)
                .map(|t| format!("{t:10.3}"))
                .unwrap_or_else(|_| format!("{:>10}", if s.ratio.is_infinite() { "-0" } else { "∞" }));
            println!(
                "{x:6.2} {eta:5.2} {:8.4} {:10.6} {:10.6} {tv}",
                s.ratio,
                s.energy / p.e_max(),
                s.ergotropy / p.e_max()
            );
        }
    }

    let p = base; // f = Γ, η = 0.3
    let a = steady_battery_analytic(&p)?;
    let n = battery_report(&steady_state_numeric(&p)?, p.omega0)?;
    println!("\nf = Γ, η = 0.3: closed form E = {:.10}, null space E = {:.10}", a.energy, n.energy);
    Ok(())
}
