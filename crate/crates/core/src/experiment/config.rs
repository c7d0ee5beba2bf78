//! TOML experiment configuration.
//!
//! ```toml
//! mode = "sweep"            # steady-analytic | steady-numeric | evolve |
//!                           # trajectories | sweep | charging-time
//! output = "fig_f"          # file stem, defaults to the mode name
//! normalize = true          # report E/E_max instead of absolute energies
//! initial = "ground"        # or "excited": charger |e⟩, battery |0⟩
//!
//! [model]
//! gamma = 1.0
//! f_over_gamma = 1.0        # or f = 0.7, or f = "optimal"
//! eta = 0.3                 # or eta_c / eta_d
//!
//! [sim]
//! gamma_dt = 1e-3           # or dt
//! t_max = 40.0
//! tau = 0.0                 # or gamma_tau
//! n_traj = 500
//! seed = 0
//! samples = 200             # or sample_stride (trajectories only)
//!
//! [sweep]
//! axis = "f_over_gamma"
//! values = [0.5, 1.0, 1.5]  # or range = { start = 0.0, stop = 2.0, points = 81 }
//! target = "steady-analytic"
//!
//! [charging]
//! epsilon = 1e-2
//! ```
//!
//! Unknown keys are rejected. Errors carry the dotted path of the offending
//! field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quantum::DensityMatrix;
use crate::steady::optimal_feedback_gain;
use crate::trajectory::{SimulationParams, DEFAULT_GAMMA_DT};

/// Default fractional error ε of the charging time.
pub const DEFAULT_EPSILON: f64 = 1e-2;
/// Default number of sample intervals for evolve and trajectory runs.
pub const DEFAULT_SAMPLES: usize = 200;
/// Default number of individual trajectories written alongside an ensemble.
pub const DEFAULT_FAN: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SteadyAnalytic,
    SteadyNumeric,
    Evolve,
    Trajectories,
    Sweep,
    ChargingTime,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::SteadyAnalytic => "steady-analytic",
            Mode::SteadyNumeric => "steady-numeric",
            Mode::Evolve => "evolve",
            Mode::Trajectories => "trajectories",
            Mode::Sweep => "sweep",
            Mode::ChargingTime => "charging-time",
        }
    }
}

/// Initial joint state of time-dependent runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// |g⟩ ⊗ |0⟩
    #[default]
    Ground,
    /// |e⟩ ⊗ |0⟩
    Excited,
}

impl InitialState {
    pub fn state(self, d: usize) -> Result<DensityMatrix> {
        let index = match self {
            InitialState::Ground => d,
            InitialState::Excited => 0,
        };
        DensityMatrix::basis(index, vec![2, d])
    }
}

/// How the feedback gain is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackGain {
    Absolute(f64),
    OverGamma(f64),
    /// f* maximising the steady inversion at the current Γ, η, n̄.
    Optimal,
}

/// A time given absolutely or in units of 1/Γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSpec {
    Absolute(f64),
    OverGamma(f64),
}

impl TimeSpec {
    fn resolve(self, gamma: f64) -> f64 {
        match self {
            TimeSpec::Absolute(t) => t,
            TimeSpec::OverGamma(x) if gamma > 0.0 => x / gamma,
            TimeSpec::OverGamma(x) => x,
        }
    }
}

/// Model section with its defaulting rules kept, so that sweeps can
/// re-resolve dependent quantities (f/Γ, f*, √η) at every grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelSpec {
    pub base: ModelParams,
    pub gain: FeedbackGain,
    /// Set when only the total efficiency was given; then η_c = η_d = √η.
    pub eta: Option<f64>,
}

impl ModelSpec {
    pub fn resolve(&self) -> Result<ModelParams> {
        let mut p = self.base;
        if let Some(eta) = self.eta {
            p.eta_c = eta.sqrt();
            p.eta_d = eta.sqrt();
        }
        p.f = match self.gain {
            FeedbackGain::Absolute(f) => f,
            FeedbackGain::OverGamma(x) => x * p.gamma,
            FeedbackGain::Optimal => optimal_feedback_gain(&ModelParams { drive: 0.0, ..p })?,
        };
        Ok(p)
    }

    /// Human-readable statement of the efficiency split, for the manifest.
    pub fn efficiency_rule(&self) -> String {
        match self.eta {
            Some(eta) => format!("eta = {eta:?} given alone; eta_c = eta_d = sqrt(eta)"),
            None => "eta_c and eta_d given explicitly (or defaulted)".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimSpec {
    pub dt: TimeSpec,
    pub t_max: Option<f64>,
    pub tau: TimeSpec,
    pub n_traj: usize,
    pub seed: u64,
    pub samples: usize,
    pub sample_stride: Option<usize>,
    /// Start of the steady-state averaging window for trajectory sweeps.
    pub average_from: Option<f64>,
    /// Individual trajectories written next to the ensemble file.
    pub fan: usize,
}

impl SimSpec {
    pub fn resolve(&self, p: &ModelParams) -> SimulationParams {
        let t_max = self.t_max.unwrap_or(f64::NAN);
        let dt = self.dt.resolve(p.gamma);
        let n_steps = (t_max / dt).round().max(1.0) as usize;
        SimulationParams {
            dt,
            t_max,
            tau: self.tau.resolve(p.gamma),
            n_traj: self.n_traj,
            seed: self.seed,
            sample_stride: self
                .sample_stride
                .unwrap_or_else(|| (n_steps / self.samples.max(1)).max(1)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    F,
    FOverGamma,
    Eta,
    EtaC,
    EtaD,
    Gamma,
    G,
    Drive,
    Nbar,
    DeltaB,
    Omega0,
    D,
    Tau,
    GammaTau,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::F => "f",
            SweepAxis::FOverGamma => "f_over_gamma",
            SweepAxis::Eta => "eta",
            SweepAxis::EtaC => "eta_c",
            SweepAxis::EtaD => "eta_d",
            SweepAxis::Gamma => "gamma",
            SweepAxis::G => "g",
            SweepAxis::Drive => "drive",
            SweepAxis::Nbar => "nbar",
            SweepAxis::DeltaB => "delta_b",
            SweepAxis::Omega0 => "omega0",
            SweepAxis::D => "d",
            SweepAxis::Tau => "tau",
            SweepAxis::GammaTau => "gamma_tau",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub target: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargingSpec {
    pub epsilon: f64,
    /// Integration horizon; chosen from the fastest rate when absent.
    pub t_max: Option<f64>,
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub model: ModelSpec,
    pub sim: SimSpec,
    pub sweep: Option<SweepSpec>,
    pub charging: ChargingSpec,
    pub initial: InitialState,
    pub output: String,
    pub normalize: bool,
}

impl ExperimentConfig {
    /// Model and simulation parameters at one value of the sweep axis.
    pub fn point(&self, axis: SweepAxis, value: f64) -> Result<(ModelParams, SimulationParams)> {
        let mut m = self.model;
        let mut s = self.sim;
        let b = &mut m.base;
        match axis {
            SweepAxis::F => m.gain = FeedbackGain::Absolute(value),
            SweepAxis::FOverGamma => m.gain = FeedbackGain::OverGamma(value),
            SweepAxis::Eta => m.eta = Some(value),
            SweepAxis::EtaC => {
                m.eta = None;
                b.eta_c = value;
            }
            SweepAxis::EtaD => {
                m.eta = None;
                b.eta_d = value;
            }
            SweepAxis::Gamma => b.gamma = value,
            SweepAxis::G => b.g = value,
            SweepAxis::Drive => b.drive = value,
            SweepAxis::Nbar => b.nbar = value,
            SweepAxis::DeltaB => b.delta_b = value,
            SweepAxis::Omega0 => b.omega0 = value,
            SweepAxis::D => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::config("sweep.values", format!("d = {value} is not an integer ≥ 2")));
                }
                b.d = value as usize;
            }
            SweepAxis::Tau => s.tau = TimeSpec::Absolute(value),
            SweepAxis::GammaTau => s.tau = TimeSpec::OverGamma(value),
        }
        let p = m.resolve().map_err(|e| in_section("model", e))?;
        Ok((p, s.resolve(&p)))
    }

    /// Parameters without any sweep applied.
    pub fn base(&self) -> Result<(ModelParams, SimulationParams)> {
        let p = self.model.resolve().map_err(|e| in_section("model", e))?;
        Ok((p, self.sim.resolve(&p)))
    }

    /// Every (model, simulation) pair the run will use, in output order.
    pub fn points(&self) -> Result<Vec<(f64, ModelParams, SimulationParams)>> {
        match &self.sweep {
            Some(sw) => sw
                .values
                .iter()
                .map(|&v| self.point(sw.axis, v).map(|(p, s)| (v, p, s)))
                .collect(),
            None => self.base().map(|(p, s)| vec![(f64::NAN, p, s)]),
        }
    }

    /// The computation performed at each point.
    pub fn target(&self) -> Mode {
        self.sweep.as_ref().map_or(self.mode, |s| s.target)
    }
}

// Raw document layout

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Mode>,
    output: Option<String>,
    normalize: Option<bool>,
    initial: Option<InitialState>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    sim: RawSim,
    sweep: Option<RawSweep>,
    #[serde(default)]
    charging: RawCharging,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModel {
    omega0: Option<f64>,
    delta_b: Option<f64>,
    g: Option<f64>,
    d: Option<usize>,
    gamma: Option<f64>,
    drive: Option<f64>,
    f: Option<RawGain>,
    f_over_gamma: Option<f64>,
    eta: Option<f64>,
    eta_c: Option<f64>,
    eta_d: Option<f64>,
    nbar: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGain {
    Value(f64),
    Named(GainName),
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum GainName {
    Optimal,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    gamma_dt: Option<f64>,
    t_max: Option<f64>,
    tau: Option<f64>,
    gamma_tau: Option<f64>,
    n_traj: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    sample_stride: Option<usize>,
    average_from: Option<f64>,
    fan: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: SweepAxis,
    values: Option<Vec<f64>>,
    range: Option<RawRange>,
    target: Mode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCharging {
    epsilon: Option<f64>,
    t_max: Option<f64>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_as(text, None)
}

/// Like [`parse_config`], with the mode supplied externally (e.g. by a
/// subcommand). A `mode` key in the document must then agree with it.
pub fn parse_config_as(text: &str, mode: Option<Mode>) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "<document>".into() } else { path }, e.into_inner().to_string())
    })?;

    let mode = match (raw.mode, mode) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::config(
                "mode",
                format!("document says `{}` but `{}` was requested", a.name(), b.name()),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::config("mode", "missing")),
    };

    let model = model_spec(&raw.model)?;
    let sim = sim_spec(&raw.sim)?;
    let sweep = match (raw.sweep, mode) {
        (Some(sw), Mode::Sweep) => Some(sweep_spec(sw)?),
        (None, Mode::Sweep) => return Err(Error::config("sweep", "mode = \"sweep\" needs a [sweep] table")),
        (Some(_), _) => return Err(Error::config("sweep", "a [sweep] table requires mode = \"sweep\"")),
        (None, _) => None,
    };
    let charging = ChargingSpec {
        epsilon: raw.charging.epsilon.unwrap_or(DEFAULT_EPSILON),
        t_max: raw.charging.t_max,
    };
    if !(charging.epsilon > 0.0 && charging.epsilon < 1.0) {
        return Err(Error::config("charging.epsilon", "must lie in (0, 1)"));
    }
    if let Some(t) = charging.t_max {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::config("charging.t_max", "must be positive and finite"));
        }
    }
    let output = raw.output.unwrap_or_else(|| mode.name().to_string());
    if output.is_empty() || output.contains(['/', '\\']) {
        return Err(Error::config("output", "must be a plain file stem"));
    }

    let cfg = ExperimentConfig {
        mode,
        model,
        sim,
        sweep,
        charging,
        initial: raw.initial.unwrap_or_default(),
        output,
        normalize: raw.normalize.unwrap_or(true),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn model_spec(r: &RawModel) -> Result<ModelSpec> {
    let mut base = ModelParams::default();
    let set = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut base.omega0, r.omega0);
    set(&mut base.delta_b, r.delta_b);
    set(&mut base.g, r.g);
    set(&mut base.gamma, r.gamma);
    set(&mut base.drive, r.drive);
    set(&mut base.nbar, r.nbar);
    if let Some(d) = r.d {
        base.d = d;
    }

    let gain = match (&r.f, r.f_over_gamma) {
        (Some(_), Some(_)) => return Err(Error::config("model.f", "give either f or f_over_gamma, not both")),
        (Some(RawGain::Value(f)), None) => FeedbackGain::Absolute(*f),
        (Some(RawGain::Named(GainName::Optimal)), None) => FeedbackGain::Optimal,
        (None, Some(x)) => FeedbackGain::OverGamma(x),
        // the default gain is f = Γ
        (None, None) => FeedbackGain::OverGamma(base.f / ModelParams::default().gamma),
    };

    let eta = match (r.eta, r.eta_c, r.eta_d) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
            return Err(Error::config("model.eta", "give either eta or eta_c/eta_d, not both"))
        }
        (Some(eta), None, None) => {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::config("model.eta", "must lie in [0, 1]"));
            }
            Some(eta)
        }
        (None, c, d) => {
            set(&mut base.eta_c, c);
            set(&mut base.eta_d, d);
            None
        }
    };
    Ok(ModelSpec { base, gain, eta })
}

fn sim_spec(r: &RawSim) -> Result<SimSpec> {
    let dt = match (r.dt, r.gamma_dt) {
        (Some(_), Some(_)) => return Err(Error::config("sim.dt", "give either dt or gamma_dt, not both")),
        (Some(dt), None) => TimeSpec::Absolute(dt),
        (None, Some(x)) => TimeSpec::OverGamma(x),
        (None, None) => TimeSpec::OverGamma(DEFAULT_GAMMA_DT),
    };
    let tau = match (r.tau, r.gamma_tau) {
        (Some(_), Some(_)) => return Err(Error::config("sim.tau", "give either tau or gamma_tau, not both")),
        (Some(t), None) => TimeSpec::Absolute(t),
        (None, Some(x)) => TimeSpec::OverGamma(x),
        (None, None) => TimeSpec::Absolute(0.0),
    };
    if r.samples.is_some() && r.sample_stride.is_some() {
        return Err(Error::config("sim.samples", "give either samples or sample_stride, not both"));
    }
    let samples = r.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(Error::config("sim.samples", "must be at least 1"));
    }
    if let Some(t) = r.t_max {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::config("sim.t_max", "must be positive and finite"));
        }
    }
    Ok(SimSpec {
        dt,
        t_max: r.t_max,
        tau,
        n_traj: r.n_traj.unwrap_or(500),
        seed: r.seed.unwrap_or(0),
        samples,
        sample_stride: r.sample_stride,
        average_from: r.average_from,
        fan: r.fan.unwrap_or(DEFAULT_FAN),
    })
}

fn sweep_spec(r: RawSweep) -> Result<SweepSpec> {
    let values = match (r.values, r.range) {
        (Some(_), Some(_)) => return Err(Error::config("sweep.values", "give either values or range, not both")),
        (Some(v), None) => v,
        (None, Some(g)) => {
            if g.points == 0 {
                return Err(Error::config("sweep.range.points", "must be at least 1"));
            }
            if g.points == 1 {
                vec![g.start]
            } else {
                (0..g.points)
                    .map(|k| g.start + (g.stop - g.start) * k as f64 / (g.points - 1) as f64)
                    .collect()
            }
        }
        (None, None) => return Err(Error::config("sweep.values", "missing (give values or range)")),
    };
    if values.is_empty() {
        return Err(Error::config("sweep.values", "sweep grid is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::config("sweep.values", format!("non-finite grid value {v}")));
    }
    if matches!(r.target, Mode::Sweep | Mode::Evolve) {
        return Err(Error::config(
            "sweep.target",
            "must be one of steady-analytic, steady-numeric, charging-time, trajectories",
        ));
    }
    Ok(SweepSpec {
        axis: r.axis,
        values,
        target: r.target,
    })
}

/// Maps a parameter error to the config path of the same field.
fn in_section(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::config(format!("{section}.{field}"), reason),
        other => other,
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let target = cfg.target();
    let timed = matches!(target, Mode::Evolve | Mode::Trajectories);
    if timed && cfg.sim.t_max.is_none() {
        return Err(Error::config("sim.t_max", format!("required for {}", target.name())));
    }
    for (_, p, s) in cfg.points()? {
        p.validate().map_err(|e| in_section("model", e))?;
        if target == Mode::SteadyAnalytic && p.drive != 0.0 {
            return Err(Error::config("model.drive", "the closed-form steady state needs drive = 0"));
        }
        if target == Mode::Trajectories {
            check_time_grid(&s)?;
            s.validate(&p).map_err(|e| in_section("sim", e))?;
            if p.f != 0.0 && p.eta() == 0.0 {
                return Err(Error::config("model.eta", "feedback needs a nonzero efficiency"));
            }
        }
    }
    Ok(())
}

fn check_time_grid(s: &SimulationParams) -> Result<()> {
    let k = (s.tau / s.dt).round();
    if (k * s.dt - s.tau).abs() > 1e-9 * s.tau.max(s.dt) {
        return Err(Error::config(
            "sim.tau",
            format!("sim.tau = {:?} is not an integer multiple of sim.dt = {:?}", s.tau, s.dt),
        ));
    }
    Ok(())
}
