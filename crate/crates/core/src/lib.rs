//! Feedback-controlled charging of a finite-dimensional quantum battery.
//!
//! A qubit charger is coupled to a `d`-level battery ladder. The charger's
//! fluorescence is monitored by homodyne detection and the measured current
//! is fed back into the charger's drive. The crate provides
//!
//! * [`quantum`]: dense complex matrices, density matrices, tensor products,
//!   partial traces, Lindblad generators and superoperators;
//! * [`model`]: the parameter record and every operator and generator of the
//!   charger–battery system;
//! * [`energetics`]: battery energy, passive states, ergotropy and its split
//!   into incoherent and coherent parts;
//! * [`steady`]: ensemble-average evolution, Liouvillian and closed-form
//!   steady states, and charging times;
//! * [`trajectory`]: conditional homodyne trajectories with (possibly
//!   delayed) feedback, and parallel reproducible ensembles;
//! * [`experiment`]: configuration files, figure presets, CSV output and run
//!   manifests, used by the `qcharge` binary.
//!
//! ```
//! use qcharge::model::ModelParams;
//! use qcharge::steady::steady_battery_analytic;
//!
//! let p = ModelParams::default(); // f = Γ, η = 0.3, d = 20
//! let s = steady_battery_analytic(&p).unwrap();
//! assert!((s.ratio - 10.0 / 7.0).abs() < 1e-12);
//! assert!((s.energy / p.e_max() - 0.8779).abs() < 1e-3);
//! ```

pub mod energetics;
pub mod error;
pub mod experiment;
pub mod model;
pub mod quantum;
pub mod steady;
pub mod trajectory;

pub use error::{Error, Result};
