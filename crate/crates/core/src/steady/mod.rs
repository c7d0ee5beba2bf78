//! Ensemble-average dynamics: time evolution, stationary states (numeric and
//! closed form) and charging times.

mod analytic;
mod charging;
mod evolve;
mod numeric;

pub use analytic::{
    geometric_mean_level, optimal_feedback_gain, steady_battery_analytic, steady_sigma_z,
    SteadyAnalytic,
};
pub use charging::{
    charging_time, charging_time_with, first_passage, ChargingOptions, ChargingTime, EnergyProcess,
};
pub use evolve::{
    evolve_generator, evolve_master_equation, evolve_with, uniform_samples, EvolutionResult,
    EvolveOptions, Propagator,
};
pub use numeric::{
    steady_state_numeric, steady_state_of_generator, steady_state_with, SteadyMethod,
    SteadyOptions, SteadyState,
};

pub(crate) use evolve::check_sample;
