use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qcharge::experiment::{
    check_diagnostics, parse_config_as, run_config, run_preset, write_outputs, Mode, PresetOptions,
    PRESETS,
};
use qcharge::{Error, Result};

/// Feedback-controlled quantum battery charging.
#[derive(Parser)]
#[command(name = "qcharge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Master seed for stochastic runs (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, env = "QCHARGE_THREADS")]
    threads: Option<usize>,

    /// Ensemble size (overrides the config or preset).
    #[arg(long, global = true)]
    trajectories: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form steady state (Ω₀ = 0).
    SteadyAnalytic(RunArgs),
    /// Liouvillian null-space steady state.
    SteadyNumeric(RunArgs),
    /// Master-equation time evolution.
    Evolve(RunArgs),
    /// Ensemble of conditional trajectories.
    Trajectories(RunArgs),
    /// Parameter sweep.
    Sweep(RunArgs),
    /// Time to reach (1 − ε) of the asymptotic energy.
    ChargingTime(RunArgs),
    /// Regenerate the data of one figure.
    Preset(PresetArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name (fig2 … fig10).
    #[arg(long, required_unless_present = "list")]
    preset: Option<String>,

    /// List the available presets.
    #[arg(long)]
    list: bool,
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: format!("cannot read: {e}"),
    })
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config {
            path: "--threads".into(),
            message: e.to_string(),
        })?;
    let started = Instant::now();

    let (mode, args) = match cli.command {
        Command::Preset(args) => {
            if args.list {
                for (name, about) in PRESETS {
                    println!("{name:<6} {about}");
                }
                return Ok(());
            }
            let name = args.preset.expect("clap enforces --preset");
            let opts = PresetOptions {
                seed: cli.seed.unwrap_or(0),
                n_traj: cli.trajectories,
            };
            let result = run_preset(&name, &opts)?;
            check_diagnostics(&result.diagnostics, 1e-9)?;
            for path in write_outputs(&result, None, &cli.out, started)? {
                println!("{}", path.display());
            }
            return Ok(());
        }
        Command::SteadyAnalytic(a) => (Mode::SteadyAnalytic, a),
        Command::SteadyNumeric(a) => (Mode::SteadyNumeric, a),
        Command::Evolve(a) => (Mode::Evolve, a),
        Command::Trajectories(a) => (Mode::Trajectories, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::ChargingTime(a) => (Mode::ChargingTime, a),
    };

    let text = read_config(&args.config)?;
    let mut cfg = parse_config_as(&text, Some(mode))?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(n) = cli.trajectories {
        if n == 0 {
            return Err(Error::Config {
                path: "--trajectories".into(),
                message: "at least one trajectory is required".into(),
            });
        }
        cfg.sim.n_traj = n;
    }
    let result = run_config(&cfg)?;
    check_diagnostics(&result.diagnostics, 1e-9)?;
    for path in write_outputs(&result, Some(&text), &cli.out, started)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcharge: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
