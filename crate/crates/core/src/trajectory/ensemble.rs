//! Parallel, bitwise-reproducible trajectory ensembles.
//!
//! Trajectory `i` always draws from stream `i` of the master seed, and all
//! reductions happen in trajectory order, so results do not depend on the
//! number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use super::run::{battery_block, check_inputs, simulate, trajectory_rng};
use super::step::{SimulationParams, StepKernel};
use crate::energetics::{ergotropy_of_matrix, report_of_matrix, EnergyReport};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::{ComplexMatrix, DensityMatrix};

/// Trajectories simulated per parallel task.
const CHUNK: usize = 8;
/// Maximum number of jackknife groups.
const JACKKNIFE_GROUPS: usize = 20;

/// Sum with a fixed binary-tree association determined by insertion order.
pub struct PairwiseSum<T> {
    stack: Vec<(u32, T)>,
}

impl<T: Clone> PairwiseSum<T> {
    pub fn new() -> Self {
        Self { stack: Vec::new() }
    }

    pub fn push(&mut self, item: T, add: impl Fn(&mut T, &T)) {
        let mut level = 0;
        let mut cur = item;
        while let Some((l, _)) = self.stack.last() {
            if *l != level {
                break;
            }
            let (_, mut left) = self.stack.pop().unwrap();
            add(&mut left, &cur);
            cur = left;
            level += 1;
        }
        self.stack.push((level, cur));
    }

    pub fn finish(mut self, add: impl Fn(&mut T, &T)) -> Option<T> {
        let (_, mut acc) = self.stack.pop()?;
        while let Some((_, mut left)) = self.stack.pop() {
            add(&mut left, &acc);
            acc = left;
        }
        Some(acc)
    }
}

impl<T: Clone> Default for PairwiseSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

struct TrajectoryOutput {
    joint: Vec<ComplexMatrix>,
    battery: Vec<ComplexMatrix>,
    energy: Vec<f64>,
    ergotropy: Vec<f64>,
    min_eigenvalue: f64,
}

/// Ensemble statistics at the sample times.
#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    /// E[ρ_r(t)] on the joint space.
    pub mean_states: Vec<DensityMatrix>,
    /// Energetics of the mean battery state.
    pub reports: Vec<EnergyReport>,
    /// Standard deviation of the battery energy across trajectories.
    pub energy_std: Vec<f64>,
    /// Standard error of the mean energy.
    pub energy_sem: Vec<f64>,
    /// Jackknife standard error of the ergotropy of the mean state.
    pub ergotropy_sem: Vec<f64>,
    /// `[trajectory][sample]` battery energies.
    pub trajectory_energies: Vec<Vec<f64>>,
    /// `[trajectory][sample]` ergotropies of each conditional battery state.
    pub trajectory_ergotropies: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub n_traj: usize,
    omega0: f64,
    group_sums: Vec<Vec<ComplexMatrix>>,
    group_sizes: Vec<usize>,
    battery_total: Vec<ComplexMatrix>,
}

/// Time averages over the samples with t ≥ `from`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowAverage {
    pub energy: f64,
    pub energy_sem: f64,
    pub ergotropy: f64,
    pub ergotropy_sem: f64,
    /// Mean over the window of the across-trajectory energy spread.
    pub dispersion: f64,
    pub samples: usize,
}

impl EnsembleResult {
    pub fn energies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.energy).collect()
    }

    pub fn ergotropies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.ergotropy).collect()
    }

    pub fn window_average(&self, from: f64) -> Result<WindowAverage> {
        let idx: Vec<usize> = (0..self.times.len()).filter(|&k| self.times[k] >= from).collect();
        if idx.is_empty() {
            return Err(Error::param("from", format!("no samples at or after t = {from}")));
        }
        let w = idx.len() as f64;
        let n = self.n_traj as f64;
        let avg = |v: &[f64]| idx.iter().map(|&k| v[k]).sum::<f64>() / w;

        let per_traj: Vec<f64> = self.trajectory_energies.iter().map(|e| avg(e)).collect();
        let energy = per_traj.iter().sum::<f64>() / n;
        let energy_sem = if self.n_traj > 1 {
            let var = per_traj.iter().map(|x| (x - energy).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };

        let ergotropy = avg(&self.ergotropies());
        let k = self.group_sizes.len();
        let ergotropy_sem = if k > 1 {
            let mut loo = Vec::with_capacity(k);
            for g in 0..k {
                let rest = (self.n_traj - self.group_sizes[g]) as f64;
                let mut acc = 0.0;
                for &s in &idx {
                    let m = (&self.battery_total[s] - &self.group_sums[g][s]).scale_real(1.0 / rest);
                    acc += ergotropy_of_matrix(&m.hermitian_part(), self.omega0)?;
                }
                loo.push(acc / w);
            }
            jackknife_se(&loo)
        } else {
            f64::NAN
        };
        Ok(WindowAverage {
            energy,
            energy_sem,
            ergotropy,
            ergotropy_sem,
            dispersion: avg(&self.energy_std),
            samples: idx.len(),
        })
    }
}

fn jackknife_se(loo: &[f64]) -> f64 {
    let k = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / k;
    ((k - 1.0) / k * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
}

fn add_all(a: &mut Vec<ComplexMatrix>, b: &Vec<ComplexMatrix>) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// Runs `s.n_traj` trajectories in parallel on the current rayon pool.
pub fn run_ensemble(p: &ModelParams, s: &SimulationParams, rho0: &DensityMatrix) -> Result<EnsembleResult> {
    check_inputs(p, s, rho0)?;
    let kernel = StepKernel::new(p, s.dt)?;
    let n_samples = s.sample_steps().len();
    let times: Vec<f64> = s.sample_steps().iter().map(|&k| k as f64 * s.dt).collect();

    let one = |i: usize| -> Result<TrajectoryOutput> {
        let mut rng = trajectory_rng(s.seed, i as u64);
        let mut out = TrajectoryOutput {
            joint: Vec::with_capacity(n_samples),
            battery: Vec::with_capacity(n_samples),
            energy: Vec::with_capacity(n_samples),
            ergotropy: Vec::with_capacity(n_samples),
            min_eigenvalue: f64::INFINITY,
        };
        let (_, _, _, min_eig) = simulate(p, s, &kernel, rho0, &mut rng, false, |smp| {
            let b = battery_block(p, smp.state)?;
            let r = report_of_matrix(&b, p.omega0)?;
            out.joint.push(smp.state.clone());
            out.energy.push(r.energy);
            out.ergotropy.push(r.ergotropy);
            out.battery.push(b);
            Ok(())
        })?;
        out.min_eigenvalue = min_eig;
        Ok(out)
    };

    let n = s.n_traj;
    let groups = JACKKNIFE_GROUPS.min(n);
    let d = p.d;
    let mut joint_sum = PairwiseSum::new();
    let mut group_sums = vec![vec![ComplexMatrix::zeros(d, d); n_samples]; groups];
    let mut group_sizes = vec![0usize; groups];
    let mut trajectory_energies = Vec::with_capacity(n);
    let mut trajectory_ergotropies = Vec::with_capacity(n);
    let mut min_eigenvalue = f64::INFINITY;

    for start in (0..n).step_by(CHUNK * rayon::current_num_threads().max(1)) {
        let end = (start + CHUNK * rayon::current_num_threads().max(1)).min(n);
        let outputs: Vec<Result<TrajectoryOutput>> = (start..end).into_par_iter().map(one).collect();
        for (offset, out) in outputs.into_iter().enumerate() {
            let i = start + offset;
            let out = out?;
            let g = i * groups / n;
            add_all(&mut group_sums[g], &out.battery);
            group_sizes[g] += 1;
            min_eigenvalue = min_eigenvalue.min(out.min_eigenvalue);
            trajectory_energies.push(out.energy);
            trajectory_ergotropies.push(out.ergotropy);
            joint_sum.push(out.joint, add_all);
        }
    }

    let joint_total = joint_sum.finish(add_all).expect("at least one trajectory");
    let nf = n as f64;
    let mut battery_total = vec![ComplexMatrix::zeros(d, d); n_samples];
    for g in &group_sums {
        add_all(&mut battery_total, g);
    }

    let mut mean_states = Vec::with_capacity(n_samples);
    let mut reports = Vec::with_capacity(n_samples);
    let mut energy_std = Vec::with_capacity(n_samples);
    let mut energy_sem = Vec::with_capacity(n_samples);
    let mut ergotropy_sem = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let mean = joint_total[k].scale_real(1.0 / nf).hermitian_part();
        let battery = battery_block(p, &mean)?;
        reports.push(report_of_matrix(&battery, p.omega0)?);
        mean_states.push(DensityMatrix::new_unchecked(mean, rho0.dims().to_vec()));

        let mu = trajectory_energies.iter().map(|e: &Vec<f64>| e[k]).sum::<f64>() / nf;
        let sd = if n > 1 {
            (trajectory_energies.iter().map(|e| (e[k] - mu).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        energy_std.push(sd);
        energy_sem.push(sd / nf.sqrt());

        ergotropy_sem.push(if groups > 1 {
            let mut loo = Vec::with_capacity(groups);
            for g in 0..groups {
                let rest = (n - group_sizes[g]) as f64;
                let m = (&battery_total[k] - &group_sums[g][k]).scale_real(1.0 / rest);
                loo.push(ergotropy_of_matrix(&m.hermitian_part(), p.omega0)?);
            }
            jackknife_se(&loo)
        } else {
            0.0
        });
    }

    Ok(EnsembleResult {
        times,
        mean_states,
        reports,
        energy_std,
        energy_sem,
        ergotropy_sem,
        trajectory_energies,
        trajectory_ergotropies,
        min_eigenvalue,
        n_traj: n,
        omega0: p.omega0,
        group_sums,
        group_sizes,
        battery_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential_for_integers() {
        for n in [1usize, 2, 3, 7, 8, 33] {
            let mut s = PairwiseSum::new();
            for i in 0..n {
                s.push(i as u64, |a, b| *a += *b);
            }
            assert_eq!(s.finish(|a, b| *a += *b).unwrap(), (0..n as u64).sum::<u64>());
        }
        assert!(PairwiseSum::<u64>::new().finish(|a, b| *a += *b).is_none());
    }

    #[test]
    fn single_trajectory_ensemble_matches_record() {
        let p = ModelParams { d: 3, ..ModelParams::default() };
        let s = SimulationParams {
            n_traj: 1,
            sample_stride: 100,
            seed: 11,
            ..SimulationParams::new(&p, 1.0)
        };
        let rho0 = DensityMatrix::basis(3, vec![2, 3]).unwrap();
        let ens = run_ensemble(&p, &s, &rho0).unwrap();
        let rec = super::super::run_trajectory(&p, &s, &rho0, 0).unwrap();
        assert_eq!(ens.times, rec.times);
        assert_eq!(ens.trajectory_energies[0], rec.battery_energy);
        for (r, e) in ens.reports.iter().zip(&rec.battery_energy) {
            assert!((r.energy - e).abs() < 1e-12);
        }
        assert!(ens.mean_states.last().unwrap().matrix().approx_eq(rec.final_state.matrix(), 1e-12));
    }
}
