//! Charging time: the first time the battery energy comes within a fraction
//! ε of its asymptotic value.

use serde::Serialize;

use super::evolve::{check_sample, EvolveOptions, Propagator};
use super::numeric::{steady_state_with, SteadyOptions};
use crate::energetics::battery_energy;
use crate::error::{Error, Result};
use crate::model::{markovian_generator, ModelParams};
use crate::quantum::{ComplexMatrix, DensityMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargingOptions {
    /// Horizon; `HorizonTooShort` if the threshold is not reached before it.
    pub t_max: f64,
    /// Coarse scan step before bisection.
    pub grid_step: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub time_tolerance: f64,
    pub evolve: EvolveOptions,
    pub steady: SteadyOptions,
}

impl Default for ChargingOptions {
    fn default() -> Self {
        Self {
            t_max: 5000.0,
            grid_step: 0.05,
            time_tolerance: 1e-9,
            evolve: EvolveOptions::default(),
            steady: SteadyOptions::default(),
        }
    }
}

impl ChargingOptions {
    /// Grid step of 0.05 in units of the energy-transfer time. Battery energy
    /// only changes through the exchange term, so E(t) varies on the scale
    /// 1/max(g, |Δ_B|) however fast the charger itself is driven or damped.
    pub fn for_params(p: &ModelParams) -> Self {
        let scale = p.g.abs().max(p.delta_b.abs());
        Self {
            grid_step: if scale > 0.0 { 0.05 / scale } else { 0.05 },
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargingTime {
    pub time: f64,
    /// E(∞) from the stationary state.
    pub asymptotic_energy: f64,
    /// (1 − ε)·E(∞)
    pub threshold: f64,
    /// Relative residual of the stationary state used for E(∞).
    pub steady_residual: f64,
    /// Smallest eigenvalue over every state inspected on the way.
    pub min_eigenvalue: f64,
}

/// A scalar process that can be advanced in time and monitored.
pub trait EnergyProcess {
    type State: Clone;
    fn advance(&mut self, state: &mut Self::State, t0: f64, t1: f64) -> Result<()>;
    fn energy(&mut self, state: &Self::State, t: f64) -> Result<f64>;
}

/// First t ≤ t_max with E(t) ≥ threshold: a grid scan, then bisection
/// inside the bracketing interval.
pub fn first_passage<P: EnergyProcess>(
    process: &mut P,
    mut state: P::State,
    threshold: f64,
    opts: &ChargingOptions,
) -> Result<f64> {
    if !(opts.grid_step > 0.0) || !(opts.t_max > 0.0) {
        return Err(Error::param("grid_step", "grid step and horizon must be positive"));
    }
    if process.energy(&state, 0.0)? >= threshold {
        return Ok(0.0);
    }
    let mut t = 0.0;
    while t < opts.t_max {
        let t_next = (t + opts.grid_step).min(opts.t_max);
        let left = state.clone();
        process.advance(&mut state, t, t_next)?;
        if process.energy(&state, t_next)? >= threshold {
            return bisect(process, left, t, t_next, threshold, opts.time_tolerance);
        }
        t = t_next;
    }
    Err(Error::HorizonTooShort { t_max: opts.t_max })
}

fn bisect<P: EnergyProcess>(
    process: &mut P,
    left: P::State,
    mut lo: f64,
    mut hi: f64,
    threshold: f64,
    tol: f64,
) -> Result<f64> {
    let mut base = left;
    let mut base_t = lo;
    for _ in 0..200 {
        if hi - lo <= tol * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut s = base.clone();
        process.advance(&mut s, base_t, mid)?;
        if process.energy(&s, mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid;
            base = s;
            base_t = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct MasterEquationProcess<'a> {
    prop: Propagator<'a>,
    p: &'a ModelParams,
    tol: f64,
    min_eig: f64,
}

impl EnergyProcess for MasterEquationProcess<'_> {
    type State = Vec<C64>;

    fn advance(&mut self, state: &mut Vec<C64>, t0: f64, t1: f64) -> Result<()> {
        // the cached derivative belongs to whatever state was advanced last
        self.prop.reset();
        self.prop.advance(state, t0, t1)
    }

    fn energy(&mut self, state: &Vec<C64>, t: f64) -> Result<f64> {
        let n = self.p.joint_dim();
        let m = ComplexMatrix::from_vec(n, n, state.clone())?;
        self.min_eig = self.min_eig.min(check_sample(&m, t, self.tol)?);
        let d = self.p.d;
        Ok(self.p.omega0 * (0..d).map(|k| k as f64 * (state[k * n + k].re + state[(d + k) * n + d + k].re)).sum::<f64>())
    }
}

/// Charging time with E(∞) taken from the Liouvillian null space.
pub fn charging_time(p: &ModelParams, epsilon: f64, rho0: &DensityMatrix) -> Result<f64> {
    Ok(charging_time_with(p, epsilon, rho0, &ChargingOptions::for_params(p))?.time)
}

pub fn charging_time_with(
    p: &ModelParams,
    epsilon: f64,
    rho0: &DensityMatrix,
    opts: &ChargingOptions,
) -> Result<ChargingTime> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if rho0.dim() != p.joint_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state of dimension {} for a {}-dimensional joint space",
            rho0.dim(),
            p.joint_dim()
        )));
    }
    let ss = steady_state_with(p, &opts.steady)?;
    let e_inf = battery_energy(&ss.state.partial_trace(1)?, p.omega0)?;
    if !(e_inf > 0.0) {
        return Err(Error::InvalidState(format!(
            "asymptotic battery energy is {e_inf}; charging time undefined"
        )));
    }
    let threshold = (1.0 - epsilon) * e_inf;
    let gen = markovian_generator(p)?;
    let mut process = MasterEquationProcess {
        prop: Propagator::new(&gen, opts.evolve),
        p,
        tol: opts.evolve.invariant_tolerance,
        min_eig: f64::INFINITY,
    };
    let time = first_passage(&mut process, rho0.matrix().data().to_vec(), threshold, opts)?;
    Ok(ChargingTime {
        time,
        asymptotic_energy: e_inf,
        threshold,
        steady_residual: ss.residual,
        min_eigenvalue: process.min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// E(t) = E∞(1 − e^{−γt}) with the state being the time itself.
    struct Exponential {
        rate: f64,
        e_inf: f64,
    }

    impl EnergyProcess for Exponential {
        type State = f64;
        fn advance(&mut self, state: &mut f64, _t0: f64, t1: f64) -> Result<()> {
            *state = t1;
            Ok(())
        }
        fn energy(&mut self, state: &f64, _t: f64) -> Result<f64> {
            Ok(self.e_inf * (1.0 - (-self.rate * state).exp()))
        }
    }

    #[test]
    fn single_exponential_surrogate() {
        let mut proc = Exponential { rate: 1.0, e_inf: 3.0 };
        let eps: f64 = 1e-2;
        let opts = ChargingOptions {
            t_max: 100.0,
            grid_step: 0.3,
            ..ChargingOptions::default()
        };
        let t = first_passage(&mut proc, 0.0, (1.0 - eps) * 3.0, &opts).unwrap();
        assert!((t - (1.0 / eps).ln()).abs() < 1e-8);
        assert!((t - 4.605).abs() < 1e-3);
    }

    #[test]
    fn horizon_too_short() {
        let mut proc = Exponential { rate: 0.01, e_inf: 1.0 };
        let opts = ChargingOptions {
            t_max: 10.0,
            grid_step: 1.0,
            ..ChargingOptions::default()
        };
        assert!(matches!(
            first_passage(&mut proc, 0.0, 0.99, &opts),
            Err(Error::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn epsilon_near_one_gives_vanishing_time() {
        let p = ModelParams { d: 4, ..ModelParams::default() };
        let ground = DensityMatrix::basis(p.d, vec![2, p.d]).unwrap();
        let t = charging_time(&p, 1.0 - 1e-12, &ground).unwrap();
        assert!(t < 1e-3, "{t}");
        assert!(charging_time(&p, 1.0, &ground).is_err());
        assert!(charging_time(&p, 0.0, &ground).is_err());
    }
}
