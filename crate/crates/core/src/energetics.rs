//! Battery energy, passive states and ergotropy.
//!
//! The battery Hamiltonian is H_B = ω₀N̂, so its energy basis is the number
//! basis and the ground energy is zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, DensityMatrix};

/// Eigenvalues down to this (negative) value are treated as round-off.
pub const CLIP_TOLERANCE: f64 = 1e-10;

/// Energetic summary of one battery state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    pub ergotropy: f64,
    pub ergotropy_incoherent: f64,
    pub ergotropy_coherent: f64,
    pub e_max: f64,
}

impl EnergyReport {
    /// Every field divided by E_max (so `e_max` becomes 1).
    pub fn normalized(&self) -> EnergyReport {
        let s = 1.0 / self.e_max;
        EnergyReport {
            energy: self.energy * s,
            ergotropy: self.ergotropy * s,
            ergotropy_incoherent: self.ergotropy_incoherent * s,
            ergotropy_coherent: self.ergotropy_coherent * s,
            e_max: 1.0,
        }
    }
}

/// E = ω₀ Tr[ρ_B N̂]
pub fn battery_energy(rho_b: &DensityMatrix, omega0: f64) -> Result<f64> {
    Ok(energy_of_matrix(rho_b.matrix(), omega0))
}

fn energy_of_matrix(m: &ComplexMatrix, omega0: f64) -> f64 {
    (0..m.rows()).map(|n| n as f64 * m[(n, n)].re).sum::<f64>() * omega0
}

/// Clips round-off negatives and renormalizes; larger negatives are an error.
fn clip_spectrum(mut values: Vec<f64>) -> Result<Vec<f64>> {
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -CLIP_TOLERANCE {
                return Err(Error::InvalidState(format!("negative eigenvalue {v:.3e}")));
            }
            *v = 0.0;
        }
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidState("spectrum sums to zero".into()));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(values)
}

/// Descending order; ties keep the original index order.
fn sort_descending(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.into_iter().map(|i| values[i]).collect()
}

fn ladder_energy(populations: &[f64], omega0: f64) -> f64 {
    populations.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() * omega0
}

fn passive_populations(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(sort_descending(&clip_spectrum(m.eigvalsh()?)?))
}

/// Eigenvalues of ρ_B in descending order on |0⟩, |1⟩, …
pub fn passive_state(rho_b: &DensityMatrix) -> Result<DensityMatrix> {
    let p = passive_populations(rho_b.matrix())?;
    DensityMatrix::diagonal(&p)
}

/// ℰ = E[ρ_B] − E[π(ρ_B)] ≥ 0
pub fn ergotropy(rho_b: &DensityMatrix, omega0: f64) -> Result<f64> {
    ergotropy_of_matrix(rho_b.matrix(), omega0)
}

pub(crate) fn ergotropy_of_matrix(m: &ComplexMatrix, omega0: f64) -> Result<f64> {
    let passive = ladder_energy(&passive_populations(m)?, omega0);
    Ok((energy_of_matrix(m, omega0) - passive).max(0.0))
}

/// Energy-basis dephased state δ(ρ_B).
pub fn dephase(rho_b: &DensityMatrix) -> Result<DensityMatrix> {
    let diag: Vec<f64> = rho_b.matrix().diagonal().iter().map(|z| z.re).collect();
    DensityMatrix::diagonal(&diag)
}

fn incoherent_ergotropy(m: &ComplexMatrix, omega0: f64) -> Result<f64> {
    let diag: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
    let p = clip_spectrum(diag)?;
    let e = ladder_energy(&p, omega0);
    Ok((e - ladder_energy(&sort_descending(&p), omega0)).max(0.0))
}

/// Full report with ℰ_i = ℰ[δ(ρ_B)] and ℰ_c = ℰ − ℰ_i.
pub fn ergotropy_split(rho_b: &DensityMatrix, omega0: f64) -> Result<EnergyReport> {
    report_of_matrix(rho_b.matrix(), omega0)
}

pub(crate) fn report_of_matrix(m: &ComplexMatrix, omega0: f64) -> Result<EnergyReport> {
    let ergotropy = ergotropy_of_matrix(m, omega0)?;
    let incoherent = incoherent_ergotropy(m, omega0)?.min(ergotropy);
    Ok(EnergyReport {
        energy: energy_of_matrix(m, omega0),
        ergotropy,
        ergotropy_incoherent: incoherent,
        ergotropy_coherent: (ergotropy - incoherent).max(0.0),
        e_max: omega0 * (m.rows() - 1) as f64,
    })
}

/// Report for the battery factor of a charger ⊗ battery state.
pub fn battery_report(joint: &DensityMatrix, omega0: f64) -> Result<EnergyReport> {
    ergotropy_split(&joint.partial_trace(1)?, omega0)
}

/// T_v = −ω₀ / ln R; negative for population inversion (R > 1).
pub fn virtual_temperature(ratio: f64, omega0: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::param("R", format!("population ratio must be positive and finite, got {ratio}")));
    }
    if ratio == 1.0 {
        return Err(Error::InfiniteTemperature);
    }
    Ok(-omega0 / ratio.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::C64;

    fn plus_state() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(s, 0.0)], vec![2]).unwrap()
    }

    #[test]
    fn energies_of_basis_states() {
        let d = 20;
        let ground = DensityMatrix::basis(0, vec![d]).unwrap();
        let top = DensityMatrix::basis(d - 1, vec![d]).unwrap();
        assert_eq!(battery_energy(&ground, 1.0).unwrap(), 0.0);
        assert_eq!(battery_energy(&top, 2.0).unwrap(), 38.0);
        let uniform = DensityMatrix::diagonal(&[1.0 / d as f64; 20]).unwrap();
        assert!((battery_energy(&uniform, 1.0).unwrap() - 9.5).abs() < 1e-12);
        assert!((ergotropy(&top, 1.0).unwrap() - 19.0).abs() < 1e-12);
        assert!(ergotropy(&uniform, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn passive_states() {
        let p = [0.5, 0.3, 0.2];
        let rho = DensityMatrix::diagonal(&p).unwrap();
        assert!(passive_state(&rho).unwrap().matrix().approx_eq(rho.matrix(), 1e-12));
        let top = DensityMatrix::basis(4, vec![5]).unwrap();
        let g = passive_state(&top).unwrap();
        assert!(g.matrix().approx_eq(DensityMatrix::basis(0, vec![5]).unwrap().matrix(), 1e-12));
        let g = passive_state(&plus_state()).unwrap();
        assert!(g.matrix().approx_eq(DensityMatrix::basis(0, vec![2]).unwrap().matrix(), 1e-12));
    }

    #[test]
    fn coherent_and_incoherent_parts() {
        let r = ergotropy_split(&plus_state(), 1.0).unwrap();
        assert!((r.ergotropy - 0.5).abs() < 1e-12);
        assert!(r.ergotropy_incoherent.abs() < 1e-12);
        assert!((r.ergotropy_coherent - 0.5).abs() < 1e-12);

        let inv = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let r = ergotropy_split(&inv, 1.0).unwrap();
        assert!((r.ergotropy - 0.4).abs() < 1e-12);
        assert!((r.ergotropy_incoherent - 0.4).abs() < 1e-12);
        assert_eq!(r.ergotropy_coherent, 0.0);
        assert_eq!(r.e_max, 1.0);
    }

    #[test]
    fn ties_do_not_change_ergotropy() {
        let rho = DensityMatrix::diagonal(&[0.2, 0.4, 0.4]).unwrap();
        // passive: (0.4, 0.4, 0.2) → E = 0.4 + 0.4 = 0.8; E = 0.4 + 0.8 = 1.2
        assert!((ergotropy(&rho, 1.0).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn clipping_window() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0 + 5e-11, -5e-11]);
        assert!(ergotropy_of_matrix(&m, 1.0).is_ok());
        let m = ComplexMatrix::from_real_diagonal(&[1.0 + 1e-8, -1e-8]);
        assert!(matches!(ergotropy_of_matrix(&m, 1.0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn virtual_temperatures() {
        let e = std::f64::consts::E;
        assert!((virtual_temperature(1.0 / e, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((virtual_temperature(e, 1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(virtual_temperature(1.0, 1.0), Err(Error::InfiniteTemperature)));
        assert!(virtual_temperature(0.0, 1.0).is_err());
        assert!(virtual_temperature(-2.0, 1.0).is_err());
    }
}
