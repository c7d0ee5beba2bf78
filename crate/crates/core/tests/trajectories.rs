use qcharge::model::{markovian_generator, JointOperators, ModelParams};
use qcharge::quantum::{ComplexMatrix, DensityMatrix, C64};
use qcharge::steady::{evolve_master_equation, uniform_samples};
use qcharge::trajectory::{
    run_ensemble, run_trajectory, sme_step, trajectory_rng, FeedbackSignal, SimulationParams,
};
use rand_distr::{Distribution, StandardNormal};

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1) (Golub–Welsch).
fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let jacobi = ComplexMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            C64::new((i.max(j) as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let (nodes, vecs) = jacobi.eigh().unwrap();
    nodes
        .iter()
        .enumerate()
        .map(|(k, &x)| (x, vecs[(0, k)].norm_sqr()))
        .collect()
}

fn mixed_state(d: usize) -> DensityMatrix {
    let n = 2 * d;
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        C64::new(((3 * i + 5 * j) % 7) as f64 - 3.0, ((i * j + 1) % 5) as f64 - 2.0)
    });
    let m = a.dot(&a.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr), vec![2, d]).unwrap()
}

fn mean_step_error(p: &ModelParams, rho: &DensityMatrix, dt: f64) -> f64 {
    let s = SimulationParams { dt, ..SimulationParams::new(p, 1.0) };
    let mut mean = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for (x, w) in gauss_hermite(40) {
        let (next, _) = sme_step(p, &s, rho, FeedbackSignal::Current, x * dt.sqrt()).unwrap();
        mean.axpy(C64::new(w, 0.0), next.matrix());
    }
    let drift = markovian_generator(p).unwrap().apply(rho.matrix()).unwrap();
    let mut expect = rho.matrix().clone();
    expect.axpy(C64::new(dt, 0.0), &drift);
    mean.max_abs_diff(&expect)
}

#[test]
fn averaged_step_matches_markovian_generator_to_first_order() {
    let cases = [
        ModelParams { d: 3, ..ModelParams::default() },
        ModelParams {
            d: 3,
            drive: 0.4,
            f: -0.3,
            delta_b: 0.5,
            nbar: 0.7,
            eta_c: 0.8,
            eta_d: 0.6,
            gamma: 1.7,
            g: 0.9,
            ..ModelParams::default()
        },
    ];
    for p in cases {
        let rho = mixed_state(p.d);
        let e1 = mean_step_error(&p, &rho, 1e-3);
        let e2 = mean_step_error(&p, &rho, 5e-4);
        // O(dt²) local error: halving dt quarters it
        assert!(e1 < 1e-4, "{e1}");
        let ratio = e1 / e2;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio} ({e1}, {e2})");
    }
}

#[test]
fn mean_current_estimates_sigma_x() {
    let p = ModelParams { d: 2, ..ModelParams::default() };
    let s = SimulationParams::new(&p, 1.0);
    let rho = mixed_state(2);
    let sx = rho.expect(&JointOperators::new(2).unwrap().sigma_x).unwrap().re;
    let mut rng = trajectory_rng(5, 0);
    let n = 100_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        let (_, r) = sme_step(&p, &s, &rho, FeedbackSignal::Current, z * s.dt.sqrt()).unwrap();
        sum += r;
        sum2 += r * r;
    }
    let mean = sum / n as f64;
    let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - sx).abs() < 3.0 * se, "{mean} vs {sx} ± {se}");
}

#[test]
fn zero_delay_equals_empty_ring_buffer() {
    let p = ModelParams { d: 3, ..ModelParams::default() };
    let s = SimulationParams { sample_stride: 100, ..SimulationParams::new(&p, 1.0) };
    let rho0 = DensityMatrix::basis(3, vec![2, 3]).unwrap();
    let a = run_trajectory(&p, &s, &rho0, 0).unwrap();
    let b = run_trajectory(&p, &SimulationParams { tau: 0.0 * s.dt, ..s }, &rho0, 0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noise_is_non_anticipating() {
    // dw of a step is independent of the state it acts on: E[dw·⟨σ_x⟩] ≈ 0
    let p = ModelParams { d: 3, drive: 0.3, ..ModelParams::default() };
    let s = SimulationParams { t_max: 2.0, n_traj: 1, ..SimulationParams::new(&p, 2.0) };
    let rho0 = DensityMatrix::basis(0, vec![2, 3]).unwrap();
    let rec = run_trajectory(&p, &s, &rho0, 3).unwrap();
    let sqrt_eg = (p.eta() * p.gamma).sqrt();
    // ⟨σ_x⟩ at the start of step k is r_k − dw_k/(√(ηΓ)dt)
    let xs: Vec<f64> = rec.record.iter().zip(&rec.noise).map(|(r, w)| r - w / (sqrt_eg * s.dt)).collect();
    let prods: Vec<f64> = xs.iter().zip(&rec.noise).map(|(x, w)| x * w / s.dt.sqrt()).collect();
    let n = prods.len() as f64;
    let mean = prods.iter().sum::<f64>() / n;
    let sd = (prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(mean.abs() < 4.0 * sd / n.sqrt(), "{mean} ± {}", sd / n.sqrt());
}

#[test]
fn ensemble_is_thread_count_independent() {
    let p = ModelParams { d: 4, ..ModelParams::default() };
    let s = SimulationParams {
        n_traj: 13,
        sample_stride: 250,
        seed: 99,
        ..SimulationParams::new(&p, 1.0)
    };
    let rho0 = DensityMatrix::basis(4, vec![2, 4]).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_ensemble(&p, &s, &rho0).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.trajectory_energies, b.trajectory_energies);
    for (x, y) in a.mean_states.iter().zip(&b.mean_states) {
        assert_eq!(x.matrix(), y.matrix());
    }
    assert_eq!(a.ergotropy_sem, b.ergotropy_sem);
}

#[test]
fn small_ensemble_tracks_master_equation() {
    let p = ModelParams { d: 4, ..ModelParams::default() };
    let s = SimulationParams {
        n_traj: 200,
        sample_stride: 1000,
        seed: 1,
        ..SimulationParams::new(&p, 5.0)
    };
    let rho0 = DensityMatrix::basis(4, vec![2, 4]).unwrap();
    let ens = run_ensemble(&p, &s, &rho0).unwrap();
    let me = evolve_master_equation(&p, &rho0, 5.0, &uniform_samples(5.0, 5)).unwrap();
    for k in 1..ens.times.len() {
        let diff = (ens.reports[k].energy - me.reports[k].energy).abs();
        assert!(diff < 4.0 * ens.energy_sem[k] + 1e-3, "t={} diff {diff} se {}", ens.times[k], ens.energy_sem[k]);
    }
    assert!(ens.min_eigenvalue >= -1e-9);
}
