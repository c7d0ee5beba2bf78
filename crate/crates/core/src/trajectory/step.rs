//! One step of the conditional (homodyne-monitored) dynamics.
//!
//! The update is a completely positive map followed by trace renormalization:
//!
//! 1. measurement and dissipation, ρ ← MρM† + (Γ↓ − ηΓ)dt σ₋ρσ₊ + Γ↑dt σ₊ρσ₋
//!    with M = 1 − ½Γ↓dt σ₊σ₋ − ½Γ↑dt σ₋σ₊ + √(ηΓ)Δy σ₋ and
//!    Δy = √(ηΓ)⟨σ_x⟩dt + dw, where Γ↓ = Γ(1 + n̄(1−η_c)) and
//!    Γ↑ = Γn̄(1−η_c);
//! 2. renormalization;
//! 3. the Hamiltonian, applied after the measurement as exact unitaries:
//!    the drive rotation exp(−iΩσ_y dt) with Ω = Ω₀ − f·r_fb, then
//!    exp(−i(Δ_B N̂ + H_int)dt).
//!
//! Expanding the average over dw to first order in dt gives the Markovian
//! feedback generator when the fed-back current is the one just measured.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::{ComplexMatrix, DensityMatrix, SparseMatrix, C64, ONE};

/// Largest allowed Γ·dt.
pub const MAX_GAMMA_DT: f64 = 1e-2;
/// Default Γ·dt.
pub const DEFAULT_GAMMA_DT: f64 = 1e-3;

/// Time stepping, horizon, delay and ensemble settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationParams {
    pub dt: f64,
    pub t_max: f64,
    /// Feedback delay τ; an integer multiple of dt.
    pub tau: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Energetics are sampled every `sample_stride` steps.
    pub sample_stride: usize,
}

impl SimulationParams {
    /// Γ·dt = 10⁻³, τ = 0, 500 trajectories, seed 0, a sample every step.
    pub fn new(p: &ModelParams, t_max: f64) -> Self {
        let dt = if p.gamma > 0.0 { DEFAULT_GAMMA_DT / p.gamma } else { DEFAULT_GAMMA_DT };
        Self {
            dt,
            t_max,
            tau: 0.0,
            n_traj: 500,
            seed: 0,
            sample_stride: 1,
        }
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param("dt", "must be positive and finite"));
        }
        if p.gamma * self.dt > MAX_GAMMA_DT * (1.0 + 1e-12) {
            return Err(Error::param(
                "dt",
                format!("Γ·dt = {} exceeds {MAX_GAMMA_DT}", p.gamma * self.dt),
            ));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::param("t_max", "must be positive and finite"));
        }
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::param("tau", "must be non-negative and finite"));
        }
        let k = (self.tau / self.dt).round();
        if (k * self.dt - self.tau).abs() > 1e-9 * self.tau.max(self.dt) {
            return Err(Error::param(
                "tau",
                format!("tau = {} is not an integer multiple of dt = {}", self.tau, self.dt),
            ));
        }
        if self.tau > 0.0 && self.dt > self.tau / 10.0 * (1.0 + 1e-12) {
            return Err(Error::param(
                "dt",
                format!("delayed feedback needs dt ≤ tau/10 (dt = {}, tau = {})", self.dt, self.tau),
            ));
        }
        if self.t_max < self.tau {
            return Err(Error::param("t_max", "horizon must be at least the delay tau"));
        }
        if self.n_traj == 0 {
            return Err(Error::param("n_traj", "at least one trajectory is required"));
        }
        if self.sample_stride == 0 {
            return Err(Error::param("sample_stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn delay_steps(&self) -> usize {
        (self.tau / self.dt).round() as usize
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Step indices at which energetics are recorded (always includes 0 and
    /// the last step).
    pub fn sample_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut v: Vec<usize> = (0..=n).step_by(self.sample_stride.max(1)).collect();
        if *v.last().unwrap() != n {
            v.push(n);
        }
        v
    }
}

/// Which measured current drives the feedback during a step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeedbackSignal {
    /// The current measured in this very step (zero delay).
    Current,
    /// A previously measured value r(t − τ).
    Delayed(f64),
    /// No record exists yet (t < τ); only the constant drive acts.
    Absent,
}

/// Precomputed coefficients and propagators for [`sme_step`].
#[derive(Clone, Debug)]
pub struct StepKernel {
    d: usize,
    dt: f64,
    sqrt_eta_gamma: f64,
    decay_half: f64,
    absorb_half: f64,
    extra_decay: f64,
    absorb: f64,
    drive: f64,
    gain: f64,
    free: Option<PairUnitary>,
}

impl StepKernel {
    pub fn new(p: &ModelParams, dt: f64) -> Result<Self> {
        p.validate()?;
        if !(dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        let unc = 1.0 - p.eta_c;
        let down = p.gamma * (1.0 + p.nbar * unc);
        let up = p.gamma * p.nbar * unc;
        let eta_gamma = p.eta() * p.gamma;
        Ok(Self {
            d: p.d,
            dt,
            sqrt_eta_gamma: eta_gamma.sqrt(),
            decay_half: 0.5 * down * dt,
            absorb_half: 0.5 * up * dt,
            extra_decay: (down - eta_gamma).max(0.0) * dt,
            absorb: up * dt,
            drive: p.drive,
            gain: p.f,
            free: if p.g == 0.0 && p.delta_b == 0.0 {
                None
            } else {
                Some(free_blocks(p, dt))
            },
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.d
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// ⟨σ_x⟩ = 2 Re Σₙ ρ[(e,n),(g,n)]
    #[inline]
    pub fn sigma_x(&self, rho: &[C64]) -> f64 {
        let d = self.d;
        let n = 2 * d;
        2.0 * (0..d).map(|k| rho[k * n + d + k].re).sum::<f64>()
    }

    /// Advances a row-major state in place; returns the measured current r.
    pub fn step(&self, rho: &mut [C64], feedback: FeedbackSignal, dw: f64) -> f64 {
        let (d, dt) = (self.d, self.dt);
        let n = 2 * d;
        let sx = self.sigma_x(rho);
        let dy = self.sqrt_eta_gamma * sx * dt + dw;
        let (m00, m10, m11) = (1.0 - self.decay_half, self.sqrt_eta_gamma * dy, 1.0 - self.absorb_half);

        // trace after the measurement map, from the diagonal blocks only
        let mut tr = 0.0;
        for a in 0..d {
            let ee = rho[a * n + a].re;
            let eg = rho[a * n + d + a].re;
            let gg = rho[(d + a) * n + d + a].re;
            tr += (m00 * m00 + m10 * m10 + self.extra_decay) * ee
                + 2.0 * m10 * m11 * eg
                + (m11 * m11 + self.absorb) * gg;
        }
        let inv = 1.0 / tr;

        let r_now = if self.sqrt_eta_gamma > 0.0 {
            sx + dw / (self.sqrt_eta_gamma * dt)
        } else {
            f64::NAN
        };
        let fed_back = match feedback {
            _ if self.gain == 0.0 => 0.0,
            FeedbackSignal::Current => self.gain * r_now,
            FeedbackSignal::Delayed(r) => self.gain * r,
            FeedbackSignal::Absent => 0.0,
        };
        let theta = (self.drive - fed_back) * dt;
        let rot = (theta != 0.0).then(|| {
            let (s, c) = theta.sin_cos();
            [[c, -s], [s, c]]
        });

        for a in 0..d {
            for b in 0..d {
                let (i0, i1) = (a * n + b, a * n + d + b);
                let (i2, i3) = ((d + a) * n + b, (d + a) * n + d + b);
                let (ee, eg, ge, gg) = (rho[i0], rho[i1], rho[i2], rho[i3]);
                let e_part = ee * m10;
                let mut blk = [
                    [ee * (m00 * m00) + gg * self.absorb, (e_part + eg * m11) * m00],
                    [(e_part + ge * m11) * m00, ee * (m10 * m10 + self.extra_decay) + (eg + ge) * (m10 * m11) + gg * (m11 * m11)],
                ];
                if let Some(r) = &rot {
                    blk = sandwich(r, &blk);
                }
                rho[i0] = blk[0][0] * inv;
                rho[i1] = blk[0][1] * inv;
                rho[i2] = blk[1][0] * inv;
                rho[i3] = blk[1][1] * inv;
            }
        }

        if let Some(u) = &self.free {
            u.apply(rho, n);
        }
        hermitize(rho, n);
        r_now
    }
}

/// m·b·mᵀ for a real 2×2 m.
#[inline]
fn sandwich(m: &[[f64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mb = [
        [b[0][0] * m[0][0] + b[1][0] * m[0][1], b[0][1] * m[0][0] + b[1][1] * m[0][1]],
        [b[0][0] * m[1][0] + b[1][0] * m[1][1], b[0][1] * m[1][0] + b[1][1] * m[1][1]],
    ];
    [
        [mb[0][0] * m[0][0] + mb[0][1] * m[0][1], mb[0][0] * m[1][0] + mb[0][1] * m[1][1]],
        [mb[1][0] * m[0][0] + mb[1][1] * m[0][1], mb[1][0] * m[1][0] + mb[1][1] * m[1][1]],
    ]
}

fn hermitize(rho: &mut [C64], n: usize) {
    for i in 0..n {
        rho[i * n + i].im = 0.0;
        for j in i + 1..n {
            let avg = (rho[i * n + j] + rho[j * n + i].conj()) * 0.5;
            rho[i * n + j] = avg;
            rho[j * n + i] = avg.conj();
        }
    }
}

/// Unitary made of 2×2 blocks on disjoint index pairs and phases elsewhere.
#[derive(Clone, Debug)]
struct PairUnitary {
    pairs: Vec<(usize, usize, [[C64; 2]; 2])>,
    phases: Vec<(usize, C64)>,
}

impl PairUnitary {
    /// ρ ← UρU† in place.
    fn apply(&self, rho: &mut [C64], n: usize) {
        for &(a, b, u) in &self.pairs {
            for j in 0..n {
                let (x, y) = (rho[a * n + j], rho[b * n + j]);
                rho[a * n + j] = u[0][0] * x + u[0][1] * y;
                rho[b * n + j] = u[1][0] * x + u[1][1] * y;
            }
        }
        for &(a, ph) in &self.phases {
            rho[a * n..(a + 1) * n].iter_mut().for_each(|z| *z *= ph);
        }
        let uc: Vec<_> = self
            .pairs
            .iter()
            .map(|&(a, b, u)| (a, b, [[u[0][0].conj(), u[0][1].conj()], [u[1][0].conj(), u[1][1].conj()]]))
            .collect();
        for row in rho.chunks_exact_mut(n) {
            for &(a, b, u) in &uc {
                let (x, y) = (row[a], row[b]);
                row[a] = x * u[0][0] + y * u[0][1];
                row[b] = x * u[1][0] + y * u[1][1];
            }
            for &(a, ph) in &self.phases {
                row[a] *= ph.conj();
            }
        }
    }
}

fn free_blocks(p: &ModelParams, dt: f64) -> PairUnitary {
    let d = p.d;
    let (g, delta) = (p.g, p.delta_b);
    let rabi = (g * g + 0.25 * delta * delta).sqrt();
    let (c, s_over) = if rabi == 0.0 {
        (1.0, dt)
    } else {
        ((rabi * dt).cos(), (rabi * dt).sin() / rabi)
    };
    let mi = C64::new(0.0, -s_over);
    let pairs = (0..d - 1)
        .map(|k| {
            let phase = C64::from_polar(1.0, -delta * (k as f64 + 0.5) * dt);
            // c·1 − i·(sin/Ω)·[[−Δ/2, g], [g, Δ/2]]
            let u = [
                [phase * (C64::new(c, 0.0) + mi * (-0.5 * delta)), phase * mi * g],
                [phase * mi * g, phase * (C64::new(c, 0.0) + mi * (0.5 * delta))],
            ];
            (k, d + k + 1, u)
        })
        .collect();
    // |g,0⟩ has zero energy; |e,d−1⟩ only picks up the detuning phase
    let top = C64::from_polar(1.0, -delta * (d - 1) as f64 * dt);
    let phases = if delta == 0.0 { Vec::new() } else { vec![(d - 1, top)] };
    PairUnitary { pairs, phases }
}

/// exp(−i(Δ_B N̂ + H_int)dt), block-diagonal on the pairs {|e,n⟩, |g,n+1⟩}.
pub fn free_propagator(p: &ModelParams, dt: f64) -> SparseMatrix {
    let d = p.d;
    let u = free_blocks(p, dt);
    let mut t = vec![(d, d, ONE)];
    if u.phases.is_empty() {
        t.push((d - 1, d - 1, ONE));
    }
    t.extend(u.phases.iter().map(|&(a, ph)| (a, a, ph)));
    for &(a, b, m) in &u.pairs {
        t.extend([(a, a, m[0][0]), (a, b, m[0][1]), (b, a, m[1][0]), (b, b, m[1][1])]);
    }
    SparseMatrix::from_triplets(2 * d, 2 * d, &t)
}

/// One conditional step on a validated state; returns the next state and the
/// measured current r with r·dt = ⟨σ_x⟩dt + dw/√(ηΓ).
pub fn sme_step(
    p: &ModelParams,
    s: &SimulationParams,
    rho: &DensityMatrix,
    feedback: FeedbackSignal,
    dw: f64,
) -> Result<(DensityMatrix, f64)> {
    let kernel = StepKernel::new(p, s.dt)?;
    if rho.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for a {}-dimensional joint space",
            rho.dim(),
            kernel.dim()
        )));
    }
    if p.f != 0.0 && p.eta() == 0.0 {
        return Err(Error::param("f", "feedback without measurement (η = 0)"));
    }
    let n = kernel.dim();
    let mut data = rho.matrix().data().to_vec();
    let r = kernel.step(&mut data, feedback, dw);
    let m = ComplexMatrix::from_vec(n, n, data)?;
    let min = m.eigvalsh()?[0];
    if min < -crate::quantum::DEFAULT_TOLERANCE {
        return Err(Error::InvariantViolation {
            time: 0.0,
            reason: format!("negative eigenvalue {min:.3e} after one step"),
        });
    }
    Ok((DensityMatrix::new_unchecked(m, rho.dims().to_vec()), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rotating_frame_hamiltonian;

    #[test]
    fn free_propagator_matches_dense_exponential() {
        for (g, delta, d) in [(1.0, 0.0, 4), (0.7, 0.3, 5), (0.0, 1.1, 3), (1.3, -2.0, 2)] {
            let p = ModelParams { g, delta_b: delta, d, ..ModelParams::default() };
            let dt = 0.37;
            let h = rotating_frame_hamiltonian(&p, 0.0).unwrap();
            let (vals, vecs) = h.eigh().unwrap();
            let n = 2 * d;
            let dense = ComplexMatrix::from_fn(n, n, |i, j| {
                (0..n)
                    .map(|k| vecs[(i, k)] * vecs[(j, k)].conj() * C64::from_polar(1.0, -vals[k] * dt))
                    .sum()
            });
            assert!(free_propagator(&p, dt).to_dense().approx_eq(&dense, 1e-12), "{g} {delta} {d}");
        }
    }

    #[test]
    fn dark_state_is_stationary() {
        let p = ModelParams { f: 0.0, d: 5, ..ModelParams::default() };
        let s = SimulationParams::new(&p, 1.0);
        let ground = DensityMatrix::basis(5, vec![2, 5]).unwrap();
        for dw in [-0.1, 0.0, 0.05] {
            let (next, _) = sme_step(&p, &s, &ground, FeedbackSignal::Current, dw).unwrap();
            assert!(next.matrix().approx_eq(ground.matrix(), 1e-15));
        }
    }

    #[test]
    fn record_relation_is_exact() {
        let p = ModelParams { d: 3, drive: 0.2, ..ModelParams::default() };
        let s = SimulationParams::new(&p, 1.0);
        let psi: Vec<C64> = (0..6).map(|k| C64::new(1.0 + k as f64, 0.5 - k as f64 * 0.2)).collect();
        let rho = DensityMatrix::pure(&psi, vec![2, 3]).unwrap();
        let sx = crate::model::JointOperators::new(3).unwrap().sigma_x;
        let expect_sx = rho.expect(&sx).unwrap().re;
        let dw = 0.0137;
        let (next, r) = sme_step(&p, &s, &rho, FeedbackSignal::Current, dw).unwrap();
        let rhs = expect_sx * s.dt + dw / (p.eta() * p.gamma).sqrt();
        assert!((r * s.dt - rhs).abs() < 1e-15);
        assert!((next.matrix().trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simulation_params_validation() {
        let p = ModelParams::default();
        let base = SimulationParams::new(&p, 10.0);
        assert!(base.validate(&p).is_ok());
        assert!(SimulationParams { dt: 0.02, ..base }.validate(&p).is_err());
        assert!(SimulationParams { tau: 0.0105, ..base }.validate(&p).is_err());
        assert!(SimulationParams { tau: 0.1, ..base }.validate(&p).is_ok());
        assert!(SimulationParams { tau: 0.005, ..base }.validate(&p).is_err());
        assert!(SimulationParams { tau: 20.0, ..base }.validate(&p).is_err());
        assert!(SimulationParams { n_traj: 0, ..base }.validate(&p).is_err());
        let steps = SimulationParams { t_max: 0.0101, sample_stride: 4, ..base }.sample_steps();
        assert_eq!(steps, vec![0, 4, 8, 10]);
    }
}
