//! Conditional dynamics under continuous homodyne monitoring and direct
//! (possibly delayed) feedback Ω(t) = Ω₀ − f·r(t − τ).

mod ensemble;
mod run;
mod step;

pub use ensemble::{run_ensemble, EnsembleResult, PairwiseSum, WindowAverage};
pub use run::{run_trajectory, trajectory_rng, DelayLine, TrajectoryRecord};
pub use step::{
    free_propagator, sme_step, FeedbackSignal, SimulationParams, StepKernel, DEFAULT_GAMMA_DT,
    MAX_GAMMA_DT,
};
