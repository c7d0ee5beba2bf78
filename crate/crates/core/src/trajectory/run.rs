//! Single conditional trajectories.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::step::{FeedbackSignal, SimulationParams, StepKernel};
use crate::energetics::{report_of_matrix, EnergyReport};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::{ComplexMatrix, DensityMatrix, C64};
use crate::steady::check_sample;

/// One run of the monitored, feedback-controlled charger.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    /// Sample times (every `sample_stride` steps).
    pub times: Vec<f64>,
    /// Measured current r for each step (empty unless requested).
    pub record: Vec<f64>,
    /// Wiener increments dw for each step (empty unless requested).
    pub noise: Vec<f64>,
    pub battery_energy: Vec<f64>,
    pub battery_ergotropy: Vec<f64>,
    pub final_state: DensityMatrix,
    /// Smallest joint-state eigenvalue over all samples.
    pub min_eigenvalue: f64,
}

/// The random stream of trajectory `index` under master seed `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Ring buffer of past currents implementing r(t − τ).
#[derive(Clone, Debug)]
pub struct DelayLine {
    buf: Vec<f64>,
    filled: usize,
    head: usize,
}

impl DelayLine {
    pub fn new(steps: usize) -> Self {
        Self {
            buf: vec![0.0; steps],
            filled: 0,
            head: 0,
        }
    }

    /// Signal to use during the coming step.
    pub fn signal(&self) -> FeedbackSignal {
        if self.buf.is_empty() {
            FeedbackSignal::Current
        } else if self.filled < self.buf.len() {
            FeedbackSignal::Absent
        } else {
            FeedbackSignal::Delayed(self.buf[self.head])
        }
    }

    /// Stores the current just measured.
    pub fn push(&mut self, r: f64) {
        if self.buf.is_empty() {
            return;
        }
        self.buf[self.head] = r;
        self.head = (self.head + 1) % self.buf.len();
        self.filled = (self.filled + 1).min(self.buf.len());
    }
}

/// Per-sample callback payload: time and joint state.
pub(crate) struct Sample<'a> {
    pub time: f64,
    pub state: &'a ComplexMatrix,
}

/// Runs one trajectory, calling `on_sample` at every sample step.
pub(crate) fn simulate(
    p: &ModelParams,
    s: &SimulationParams,
    kernel: &StepKernel,
    rho0: &DensityMatrix,
    rng: &mut ChaCha8Rng,
    keep_record: bool,
    mut on_sample: impl FnMut(Sample<'_>) -> Result<()>,
) -> Result<(ComplexMatrix, Vec<f64>, Vec<f64>, f64)> {
    let n = 2 * p.d;
    let n_steps = s.n_steps();
    let samples = s.sample_steps();
    let sqrt_dt = s.dt.sqrt();
    let mut rho = rho0.matrix().data().to_vec();
    let mut delay = DelayLine::new(s.delay_steps());
    let (mut record, mut noise) = if keep_record {
        (Vec::with_capacity(n_steps), Vec::with_capacity(n_steps))
    } else {
        (Vec::new(), Vec::new())
    };
    let mut min_eig = f64::INFINITY;
    let mut next_sample = 0;
    let mut emit = |step: usize, rho: &[C64], next_sample: &mut usize| -> Result<()> {
        if *next_sample < samples.len() && samples[*next_sample] == step {
            let t = step as f64 * s.dt;
            let m = ComplexMatrix::from_vec(n, n, rho.to_vec())?;
            min_eig = min_eig.min(check_sample(&m, t, crate::quantum::DEFAULT_TOLERANCE)?);
            on_sample(Sample {
                time: t,
                state: &m,
            })?;
            *next_sample += 1;
        }
        Ok(())
    };
    emit(0, &rho, &mut next_sample)?;
    for step in 1..=n_steps {
        let z: f64 = StandardNormal.sample(rng);
        let dw = z * sqrt_dt;
        let r = kernel.step(&mut rho, delay.signal(), dw);
        delay.push(r);
        if keep_record {
            record.push(r);
            noise.push(dw);
        }
        emit(step, &rho, &mut next_sample)?;
    }
    if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvariantViolation {
            time: s.t_max,
            reason: "non-finite state".into(),
        });
    }
    Ok((ComplexMatrix::from_vec(n, n, rho)?, record, noise, min_eig))
}

pub(crate) fn battery_block(p: &ModelParams, joint: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(DensityMatrix::new_unchecked(joint.clone(), vec![2, p.d])
        .partial_trace(1)?
        .into_matrix())
}

pub(crate) fn check_inputs(p: &ModelParams, s: &SimulationParams, rho0: &DensityMatrix) -> Result<()> {
    p.validate()?;
    s.validate(p)?;
    if p.f != 0.0 && p.eta() == 0.0 {
        return Err(Error::param("f", "feedback without measurement (η = 0)"));
    }
    if rho0.dim() != p.joint_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state of dimension {} for a {}-dimensional joint space",
            rho0.dim(),
            p.joint_dim()
        )));
    }
    Ok(())
}

/// Runs trajectory number `stream` of the ensemble seeded by `s.seed`,
/// keeping the full measurement record.
pub fn run_trajectory(
    p: &ModelParams,
    s: &SimulationParams,
    rho0: &DensityMatrix,
    stream: u64,
) -> Result<TrajectoryRecord> {
    check_inputs(p, s, rho0)?;
    let kernel = StepKernel::new(p, s.dt)?;
    let mut rng = trajectory_rng(s.seed, stream);
    let mut times = Vec::new();
    let mut reports: Vec<EnergyReport> = Vec::new();
    let (last, record, noise, min_eig) = simulate(p, s, &kernel, rho0, &mut rng, true, |smp| {
        times.push(smp.time);
        reports.push(report_of_matrix(&battery_block(p, smp.state)?, p.omega0)?);
        Ok(())
    })?;
    Ok(TrajectoryRecord {
        times,
        record,
        noise,
        battery_energy: reports.iter().map(|r| r.energy).collect(),
        battery_ergotropy: reports.iter().map(|r| r.ergotropy).collect(),
        final_state: DensityMatrix::new_unchecked(last, rho0.dims().to_vec()),
        min_eigenvalue: min_eig,
    })
}
