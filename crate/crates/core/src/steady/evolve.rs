//! Ensemble-average time evolution with an adaptive Dormand–Prince 5(4)
//! integrator acting directly on the density matrix.

use serde::Serialize;

use crate::energetics::{report_of_matrix, EnergyReport};
use crate::error::{Error, Result};
use crate::model::{markovian_generator, ModelParams};
use crate::quantum::{ComplexMatrix, DensityMatrix, Generator, C64, DEFAULT_TOLERANCE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Tolerance for the trace, Hermiticity and positivity checks at samples.
    pub invariant_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 10_000_000,
            invariant_tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Sampled solution of dρ/dt = 𝓛ρ.
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Energetics of the battery factor at each sample.
    pub reports: Vec<EnergyReport>,
    /// Smallest eigenvalue seen over all samples.
    pub min_eigenvalue: f64,
    pub steps: usize,
}

impl EvolutionResult {
    pub fn energies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.energy).collect()
    }

    pub fn ergotropies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.ergotropy).collect()
    }
}

// Dormand–Prince tableau (the generator is autonomous, so the nodes are unused)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights equal A[6]; E = b5 − b4
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integrator for one generator. Keeps its step size between calls
/// so that piecewise propagation over a sampling grid stays cheap.
pub struct Propagator<'a> {
    gen: &'a Generator,
    opts: EvolveOptions,
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    next: Vec<C64>,
    h: f64,
    fsal_valid: bool,
    pub steps: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(gen: &'a Generator, opts: EvolveOptions) -> Self {
        let n2 = gen.dim() * gen.dim();
        Self {
            gen,
            opts,
            k: vec![vec![ZERO; n2]; 7],
            stage: vec![ZERO; n2],
            next: vec![ZERO; n2],
            h: 0.0,
            fsal_valid: false,
            steps: 0,
        }
    }

    /// Integrates `rho` (row-major) from `t0` to `t1`, landing exactly on `t1`.
    pub fn advance(&mut self, rho: &mut [C64], t0: f64, t1: f64) -> Result<()> {
        if t1 < t0 {
            return Err(Error::Integrator {
                time: t0,
                reason: format!("cannot integrate backwards to {t1}"),
            });
        }
        if t1 == t0 {
            return Ok(());
        }
        if !self.fsal_valid {
            self.gen.apply_into(rho, &mut self.k[0]);
            self.fsal_valid = true;
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(rho, t1 - t0);
        }
        let mut t = t0;
        while t < t1 {
            if self.steps >= self.opts.max_steps {
                return Err(Error::Integrator {
                    time: t,
                    reason: format!("exceeded {} steps", self.opts.max_steps),
                });
            }
            let remaining = t1 - t;
            let landing = self.h >= remaining;
            let h = if landing { remaining } else { self.h };
            let err = self.try_step(rho, h);
            if !err.is_finite() {
                self.h *= 0.2;
                if self.h < 1e-14 * t1.abs().max(1.0) {
                    return Err(Error::Integrator {
                        time: t,
                        reason: "non-finite error estimate".into(),
                    });
                }
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                rho.copy_from_slice(&self.next);
                self.k.swap(0, 6);
                t = if landing { t1 } else { t + h };
                self.steps += 1;
                // a clamped landing step says nothing about the natural size
                if !landing || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.h = h * factor.min(1.0);
                if self.h < 1e-14 * t1.abs().max(1.0) {
                    return Err(Error::Integrator {
                        time: t,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Forgets the cached derivative (call after modifying the state).
    pub fn reset(&mut self) {
        self.fsal_valid = false;
    }

    fn initial_step(&mut self, rho: &[C64], span: f64) -> f64 {
        let scale = |y: &[C64], i: usize| self.opts.atol + self.opts.rtol * y[i].norm();
        let n = rho.len() as f64;
        let d0 = (rho.iter().enumerate().map(|(i, z)| (z.norm() / scale(rho, i)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self.k[0]
            .iter()
            .enumerate()
            .map(|(i, z)| (z.norm() / scale(rho, i)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span)
    }

    /// One trial step of size h from `rho`; result in `self.next`, error norm returned.
    fn try_step(&mut self, rho: &[C64], h: f64) -> f64 {
        let n = rho.len();
        for s in 1..7 {
            for i in 0..n {
                let mut acc = ZERO;
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        acc += self.k[j][i] * *a;
                    }
                }
                self.stage[i] = rho[i] + acc * h;
            }
            self.gen.apply_into(&self.stage, &mut self.k[s]);
            if s == 6 {
                // stage 6 input is the fifth-order solution
                self.next.copy_from_slice(&self.stage);
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            let mut e = ZERO;
            for (j, w) in E.iter().enumerate() {
                if *w != 0.0 {
                    e += self.k[j][i] * *w;
                }
            }
            let sc = self.opts.atol + self.opts.rtol * rho[i].norm().max(self.next[i].norm());
            sum += ((e * h).norm() / sc).powi(2);
        }
        (sum / n as f64).sqrt()
    }
}

pub(crate) fn check_sample(m: &ComplexMatrix, time: f64, tol: f64) -> Result<f64> {
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvariantViolation {
            time,
            reason: format!("trace {tr}"),
        });
    }
    let herm = m.max_abs_diff(&m.adjoint());
    if herm > tol {
        return Err(Error::InvariantViolation {
            time,
            reason: format!("anti-Hermitian part {herm:.3e}"),
        });
    }
    let min = m.hermitian_part().eigvalsh()?[0];
    if min < -tol {
        return Err(Error::InvariantViolation {
            time,
            reason: format!("negative eigenvalue {min:.3e}"),
        });
    }
    Ok(min)
}

fn validate_samples(sample_times: &[f64], t_max: f64) -> Result<()> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param("t_max", "must be positive and finite"));
    }
    if sample_times.is_empty() {
        return Err(Error::param("sample_times", "at least one sample time is required"));
    }
    let mut prev = -1.0;
    for &t in sample_times {
        if !(t >= 0.0 && t <= t_max) {
            return Err(Error::param("sample_times", format!("{t} lies outside [0, {t_max}]")));
        }
        if t <= prev {
            return Err(Error::param("sample_times", "must be strictly increasing"));
        }
        prev = t;
    }
    Ok(())
}

/// Evenly spaced samples `0, t_max/n, …, t_max`.
pub fn uniform_samples(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

pub fn evolve_master_equation(
    p: &ModelParams,
    rho0: &DensityMatrix,
    t_max: f64,
    sample_times: &[f64],
) -> Result<EvolutionResult> {
    evolve_with(p, rho0, t_max, sample_times, &EvolveOptions::default())
}

pub fn evolve_with(
    p: &ModelParams,
    rho0: &DensityMatrix,
    t_max: f64,
    sample_times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    let gen = markovian_generator(p)?;
    if rho0.dim() != p.joint_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state of dimension {} for a {}-dimensional joint space",
            rho0.dim(),
            p.joint_dim()
        )));
    }
    evolve_generator(&gen, rho0, t_max, sample_times, opts, |m| {
        let battery = DensityMatrix::new_unchecked(m.clone(), vec![2, p.d]).partial_trace(1)?;
        report_of_matrix(battery.matrix(), p.omega0)
    })
}

/// Generic driver: integrates and evaluates `report` on each sampled state.
pub fn evolve_generator(
    gen: &Generator,
    rho0: &DensityMatrix,
    t_max: f64,
    sample_times: &[f64],
    opts: &EvolveOptions,
    mut report: impl FnMut(&ComplexMatrix) -> Result<EnergyReport>,
) -> Result<EvolutionResult> {
    validate_samples(sample_times, t_max)?;
    let n = gen.dim();
    let mut rho = rho0.matrix().clone().into_vec();
    let mut prop = Propagator::new(gen, *opts);
    let mut out = EvolutionResult {
        times: Vec::with_capacity(sample_times.len()),
        states: Vec::with_capacity(sample_times.len()),
        reports: Vec::with_capacity(sample_times.len()),
        min_eigenvalue: f64::INFINITY,
        steps: 0,
    };
    let mut t = 0.0;
    for &ts in sample_times {
        prop.advance(&mut rho, t, ts)?;
        t = ts;
        let m = ComplexMatrix::from_vec(n, n, rho.clone())?;
        let min = check_sample(&m, t, opts.invariant_tolerance)?;
        out.min_eigenvalue = out.min_eigenvalue.min(min);
        let m = m.hermitian_part();
        out.reports.push(report(&m)?);
        out.states.push(DensityMatrix::new_unchecked(m, rho0.dims().to_vec()));
        out.times.push(t);
    }
    out.steps = prop.steps;
    Ok(out)
}
