mod common;

use common::*;
use proptest::prelude::*;
use qcharge::energetics::{battery_energy, dephase, ergotropy, ergotropy_split, passive_state};
use qcharge::quantum::{ComplexMatrix, DensityMatrix, C64};

fn ladder_energy(m: &ComplexMatrix) -> f64 {
    (0..m.rows()).map(|n| n as f64 * m[(n, n)].re).sum()
}

/// max over the sampled unitaries of E[ρ] − E[UρU†]
fn sampled_work(rho: &ComplexMatrix, unitaries: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let e = ladder_energy(rho);
    (0..unitaries)
        .map(|_| {
            let u = random_unitary(&mut r, rho.rows());
            e - ladder_energy(&u.dot(rho).dot(&u.adjoint()))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn state(m: ComplexMatrix) -> DensityMatrix {
    let n = m.rows();
    DensityMatrix::new(m, vec![n]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn report_invariants(d in 2usize..8, rank in 1usize..8, seed in any::<u64>(), omega0 in 0.1..3.0f64) {
        let rho = state(random_low_rank(&mut rng(seed), d, rank.min(d)));
        let r = ergotropy_split(&rho, omega0).unwrap();
        let tol = 1e-10 * omega0 * d as f64;
        prop_assert!(r.ergotropy >= 0.0 && r.ergotropy <= r.energy + tol);
        prop_assert!(r.ergotropy_incoherent >= 0.0 && r.ergotropy_coherent >= 0.0);
        prop_assert!((r.ergotropy_incoherent + r.ergotropy_coherent - r.ergotropy).abs() < tol);
        prop_assert!((r.e_max - omega0 * (d - 1) as f64).abs() < 1e-12);
        prop_assert!((r.energy - battery_energy(&rho, omega0).unwrap()).abs() < tol);
    }

    #[test]
    fn passive_states_are_passive(d in 2usize..8, seed in any::<u64>()) {
        let rho = state(random_state_matrix(&mut rng(seed), d));
        let pi = passive_state(&rho).unwrap();
        let diag: Vec<f64> = pi.matrix().diagonal().iter().map(|z| z.re).collect();
        prop_assert!(diag.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(pi.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&diag)) == 0.0);
        prop_assert!(ergotropy(&pi, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn dephasing_never_adds_ergotropy(d in 2usize..8, seed in any::<u64>()) {
        let rho = state(random_low_rank(&mut rng(seed), d, 1 + (seed as usize) % d));
        let full = ergotropy(&rho, 1.0).unwrap();
        let dephased = ergotropy(&dephase(&rho).unwrap(), 1.0).unwrap();
        prop_assert!(dephased <= full + 1e-10);
    }

    #[test]
    fn no_sampled_unitary_beats_the_spectral_formula(d in 2usize..5, seed in any::<u64>()) {
        let rho = random_state_matrix(&mut rng(seed), d);
        let spectral = ergotropy(&state(rho.clone()), 1.0).unwrap();
        prop_assert!(sampled_work(&rho, 200, seed ^ 0x5eed) <= spectral + 1e-9);
    }
}

#[test]
fn equal_superposition_of_a_qubit_battery() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [C64::new(h, 0.0), C64::new(h, 0.0)];
    let rho = DensityMatrix::pure(&psi, vec![2]).unwrap();
    let r = ergotropy_split(&rho, 1.0).unwrap();
    assert!((r.ergotropy - 0.5).abs() < 1e-12);
    assert!(r.ergotropy_incoherent.abs() < 1e-12);
    assert!((r.ergotropy_coherent - 0.5).abs() < 1e-12);
    // sampled unitaries approach the same value from below
    let work = sampled_work(rho.matrix(), 20_000, 3);
    assert!(work <= 0.5 + 1e-12 && work > 0.49, "{work}");
}

#[test]
fn inverted_qubit_battery() {
    let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
    let r = ergotropy_split(&rho, 1.0).unwrap();
    assert!((r.energy - 0.7).abs() < 1e-15);
    assert!((r.ergotropy - 0.4).abs() < 1e-12);
    assert!((r.ergotropy_incoherent - 0.4).abs() < 1e-12);
    assert!(r.ergotropy_coherent.abs() < 1e-12);
}

#[test]
fn uniform_twenty_level_battery() {
    let rho = DensityMatrix::diagonal(&[0.05; 20]).unwrap();
    assert!((battery_energy(&rho, 1.0).unwrap() - 9.5).abs() < 1e-12);
    assert!(ergotropy(&rho, 1.0).unwrap().abs() < 1e-12);
    let top = DensityMatrix::basis(19, vec![20]).unwrap();
    assert!((ergotropy(&top, 2.0).unwrap() - 38.0).abs() < 1e-12);
}
