//! Energy, passive states and ergotropy of a few small battery states.

use qcharge::energetics::{dephase, ergotropy_split, passive_state};
use qcharge::quantum::{DensityMatrix, C64};

fn show(name: &str, rho: &DensityMatrix) -> qcharge::Result<()> {
    let r = ergotropy_split(rho, 1.0)?;
    println!(
        "{name:<28} E = {:.4}  ergotropy = {:.4}  (incoherent {:.4}, coherent {:.4})",
        r.energy, r.ergotropy, r.ergotropy_incoherent, r.ergotropy_coherent
    );
    Ok(())
}

fn main() -> qcharge::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(&[C64::new(h, 0.0), C64::new(h, 0.0)], vec![2])?;
    show("qubit |+>", &plus)?;
    show("qubit dephased |+>", &dephase(&plus)?)?;
    show("qubit diag(0.3, 0.7)", &DensityMatrix::diagonal(&[0.3, 0.7])?)?;

    // inverted geometric populations on a 6-level ladder
    let r: f64 = 1.5;
    let w: Vec<f64> = (0..6).map(|n| r.powi(n)).collect();
    let z: f64 = w.iter().sum();
    let inverted = DensityMatrix::diagonal(&w.iter().map(|x| x / z).collect::<Vec<_>>())?;
    show("6 levels, ratio 1.5", &inverted)?;
    let passive = passive_state(&inverted)?;
    show("  its passive state", &passive)?;

    // a coherent superposition of the ground and top levels
    let mut psi = vec![C64::new(0.0, 0.0); 6];
    psi[0] = C64::new(0.6, 0.0);
    psi[5] = C64::new(0.0, 0.8);
    show("0.6|0> + 0.8i|5>", &DensityMatrix::pure(&psi, vec![6])?)?;
    Ok(())
}
