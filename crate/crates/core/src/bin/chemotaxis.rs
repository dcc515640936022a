use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chemotaxis::environment::NoiseModel;
use chemotaxis::export;
use chemotaxis::harness::{self, RampProtocol, Schedule, TrialKind};
use chemotaxis::trial::{lock_and_deviation, run_trial};
use chemotaxis::{Config, Result};

#[derive(Parser)]
#[command(name = "chemotaxis", version, about = "Spiking chemotaxis navigator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed (first seed for batches).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated duration per trial (s).
    #[arg(long)]
    duration: Option<f64>,
    /// Integration step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Enable uniform sensor noise with this half-width (mM).
    #[arg(long)]
    noise: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Common {
    fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(d) = self.duration {
            cfg.sim.duration = d;
        }
        if let Some(dt) = self.dt {
            cfg.sim.dt = dt;
        }
        if let Some(a) = self.noise {
            cfg.noise = NoiseModel::uniform(a);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|source| chemotaxis::Error::Io {
            path: self.out.clone(),
            source,
        })?;
        Ok(&self.out)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and write its trajectory, spike raster and result.
    Simulate(Common),
    /// Run a batch of seeded SNN trials.
    Batch {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Run a batch of seeded Lévy-walk trials.
    Levy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Graded detector response to a concentration step.
    StepResponse {
        #[command(flatten)]
        common: Common,
        /// Baseline concentration (mM).
        #[arg(long, default_value_t = 40.0)]
        baseline: f64,
        /// Concentration after the step (mM).
        #[arg(long, default_value_t = 50.0)]
        level: f64,
        /// Step onset (s).
        #[arg(long, default_value_t = 10.0)]
        at: f64,
        /// Record every n-th step.
        #[arg(long, default_value_t = 10)]
        every: usize,
    },
    /// Detector spike rate versus ramp gradient for several thresholds.
    FreqCurve {
        #[command(flatten)]
        common: Common,
        /// Gradients (mM/s), comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,0.01,0.02,0.03,0.05,0.08,0.1,0.15,0.2,0.3,0.5"
        )]
        gradients: Vec<f64>,
        /// Spike thresholds (mV), comma separated; defaults around the configured value.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v_t: Vec<f64>,
    },
    /// Sample the concentration field on a grid.
    FieldExport {
        #[command(flatten)]
        common: Common,
        /// Grid points per side.
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Print the resolved configuration as TOML.
    Config(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(common) => {
            let cfg = common.resolve()?;
            let (traj, result) = run_trial(&cfg.setup(), common.seed)?;
            let out = common.out_dir()?;
            let stem = format!("trial_{}", common.seed);
            match common.format {
                Format::Csv => export::write_trajectory_bundle(out, &stem, &traj)?,
                Format::Json => export::write_json(&out.join(format!("{stem}.json")), &traj)?,
            }
            let (lock, deviation) = lock_and_deviation(&traj, cfg.network.sensor.c_track);
            export::write_json(
                &out.join(format!("{stem}_result.json")),
                &serde_json::json!({ "result": result, "config": cfg }),
            )?;
            println!(
                "seed {}: success {} time {:?} deviation {:?} (recorded lock {:?}, {:?})",
                result.seed,
                result.success,
                result.time_to_target,
                result.post_lock_mean_deviation,
                lock,
                deviation
            );
        }
        Command::Batch { common, trials } => batch(TrialKind::Snn, &common, trials)?,
        Command::Levy { common, trials } => batch(TrialKind::Levy, &common, trials)?,
        Command::StepResponse {
            common,
            baseline,
            level,
            at,
            every,
        } => {
            let cfg = common.resolve()?;
            let duration = common.duration.unwrap_or(at + 120.0);
            let sched = Schedule::step(baseline, at, level, duration);
            let dt = common.dt.unwrap_or(cfg.sim.dt);
            let rows = harness::step_response(&cfg.network.n3, &cfg.network.n4, &sched, dt, every)?;
            let out = common.out_dir()?;
            match common.format {
                Format::Csv => {
                    export::write_step_response_csv(&out.join("step_response.csv"), &rows)?
                }
                Format::Json => export::write_json(&out.join("step_response.json"), &rows)?,
            }
            println!(
                "peak |V - V0|: left {:.3} mV, right {:.3} mV",
                harness::peak_deviation(&rows, chemotaxis::ase::Side::Left, cfg.network.n3.v0),
                harness::peak_deviation(&rows, chemotaxis::ase::Side::Right, cfg.network.n4.v0)
            );
        }
        Command::FreqCurve {
            common,
            gradients,
            v_t,
        } => {
            let cfg = common.resolve()?;
            let v_ts = if v_t.is_empty() {
                let base = cfg.network.n3.v_t;
                vec![base + 2.0, base, base - 2.0]
            } else {
                v_t
            };
            let proto = RampProtocol {
                dt: common.dt.unwrap_or(cfg.sim.dt),
                ..RampProtocol::default()
            };
            let pts =
                harness::freq_curve(&cfg.network.n3, &cfg.network.n4, &gradients, &v_ts, &proto)?;
            let out = common.out_dir()?;
            match common.format {
                Format::Csv => export::write_freq_curve_csv(&out.join("freq_curve.csv"), &pts)?,
                Format::Json => export::write_json(&out.join("freq_curve.json"), &pts)?,
            }
            for p in &pts {
                println!(
                    "{:?}\tV_T {}\tdC/dt {}\t{} Hz",
                    p.side, p.v_t, p.gradient, p.rate_hz
                );
            }
        }
        Command::FieldExport { common, grid } => {
            let cfg = common.resolve()?;
            let out = common.out_dir()?;
            match common.format {
                Format::Csv => export::write_field_csv(&out.join("field.csv"), &cfg.field, grid)?,
                Format::Json => export::write_json(&out.join("field.json"), &cfg.field.grid(grid))?,
            }
        }
        Command::Config(common) => print!("{}", common.resolve()?.to_toml_string()),
    }
    Ok(())
}

fn batch(kind: TrialKind, common: &Common, trials: usize) -> Result<()> {
    let cfg = common.resolve()?;
    let report = harness::run_batch(kind, trials, common.seed, &cfg)?;
    let out = common.out_dir()?;
    let name = match kind {
        TrialKind::Snn => "batch",
        TrialKind::Levy => "levy",
    };
    export::write_json(&out.join(format!("{name}.json")), &report)?;
    let s = &report.stats;
    println!(
        "{name}: {}/{} successes ({:.1}%), mean time {:?} s, mean deviation {:?} mM",
        s.successes,
        s.n_trials,
        100.0 * s.success_rate,
        s.mean_time_to_target,
        s.mean_deviation
    );
    Ok(())
}
