//! `lab`: configuration checks, schedules, field dumps and scenario runs.
//!
//! Exit codes: 0 success, 1 configuration or resolution error, 2 a verdict
//! (measured value against threshold) failed.

use anyhow::{anyhow, Context, Result};
use cascade_lab::eulerian::ScalarField;
use cascade_lab::experiments::{self, parse_override, ExperimentConfig, RunReport, Scenario};
use cascade_lab::field::{build_field, field_norm_report, Extension};
use cascade_lab::io::{to_json_bytes, write_atomic, write_grid};
use cascade_lab::params::rational::to_f64;
use cascade_lab::params::{derive_schedule, diffusivity_sequences, validate_constraints, Exponent};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(name = "lab", version, about = "Cascade shear-flow laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-key override, e.g. `--set schedule.q_max=3`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the preset's parameters against the exact constraints.
    Validate(ConfigArgs),
    /// Print the cascade schedule and diffusivity sequences as JSON.
    Schedule {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write schedule.json here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Velocity-field utilities.
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
    /// Run a scenario and write its report.
    Run {
        /// theorem_A, theorem_B, theorem_C or regularity.
        scenario: String,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the verdicts of a finished run.
    Report {
        /// Directory holding report.json.
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Ext {
    ForwardOnly,
    Reflect,
    ReflectWithSwap,
}

impl From<Ext> for Extension {
    fn from(e: Ext) -> Self {
        match e {
            Ext::ForwardOnly => Extension::ForwardOnly,
            Ext::Reflect => Extension::Reflect,
            Ext::ReflectWithSwap => Extension::ReflectWithSwap,
        }
    }
}

#[derive(Subcommand)]
enum FieldAction {
    /// Sample both velocity components at the given times into binary grids.
    Dump {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Directory for the `u1_t<k>` / `u2_t<k>` grid files.
        #[arg(long)]
        out: PathBuf,
        /// Sample times; defaults to the middle of the first mixing slot.
        #[arg(long = "time")]
        times: Vec<f64>,
        /// Grid nodes per side.
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, value_enum, default_value = "forward-only")]
        extension: Ext,
    },
    /// Per-segment norms and the space-time norm of the field, as JSON.
    Norms {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Write norms.json here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "forward-only")]
        extension: Ext,
    },
}

/// Failure classes mapped to exit codes.
enum Outcome {
    Ok,
    VerdictFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerdictFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &ConfigArgs, scenario: Option<Scenario>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read config {}", args.config.display()))?;
    let overrides = args.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let mut cfg = ExperimentConfig::from_toml(&text, scenario, &overrides)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Validate(args) => {
            let cfg = load(&args, None)?;
            let report = validate_constraints(&cfg.params()?)?;
            print!("{}", report.table());
            Ok(if report.passed { Outcome::Ok } else { Outcome::VerdictFailed })
        }
        Command::Schedule { cfg: args, out } => {
            let cfg = load(&args, None)?;
            let p = cfg.params()?;
            let sched = derive_schedule(&p, cfg.schedule.q_max)?;
            let seq = diffusivity_sequences(&p, &sched);
            let doc = serde_json::json!({
                "preset": cfg.preset,
                "params": p.to_json(),
                "schedule": sched.to_json(),
                "diffusivity": seq,
            });
            emit(&doc, out.as_deref(), "schedule.json")?;
            Ok(Outcome::Ok)
        }
        Command::Field { action } => field(action),
        Command::Run { scenario, cfg: args, out } => {
            let scenario = Scenario::parse(&scenario)?;
            let mut cfg = load(&args, Some(scenario))?;
            if let Some(o) = out {
                cfg.output.dir = o.to_string_lossy().into_owned();
            }
            run(&cfg)
        }
        Command::Report { dir } => {
            let path = dir.join("report.json");
            let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
            let doc: serde_json::Value = serde_json::from_str(&text)?;
            let verdicts = doc["verdicts"].as_array().ok_or_else(|| anyhow!("report has no verdicts"))?;
            for v in verdicts {
                println!(
                    "[{}] {}: {} {} {}",
                    if v["passed"].as_bool() == Some(true) { "pass" } else { "FAIL" },
                    v["name"].as_str().unwrap_or("?"),
                    v["measured"],
                    v["relation"].as_str().unwrap_or("?"),
                    v["threshold"]
                );
            }
            let passed = doc["passed"].as_bool() == Some(true);
            println!("overall: {}", if passed { "pass" } else { "FAIL" });
            Ok(if passed { Outcome::Ok } else { Outcome::VerdictFailed })
        }
    }
}

fn emit(doc: &serde_json::Value, out: Option<&Path>, name: &str) -> Result<()> {
    let bytes = to_json_bytes(doc)?;
    match out {
        Some(dir) => write_atomic(&dir.join(name), &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let dir = cfg.out_dir();
    let started = unix_seconds();
    let clock = Instant::now();
    println!("# effective configuration\n{}", cfg.to_toml());
    let report: RunReport = experiments::run(cfg)?;
    write_atomic(&dir.join("config.toml"), cfg.to_toml().as_bytes())?;
    report.write(&dir)?;
    let meta = serde_json::json!({
        "started_unix": started,
        "finished_unix": unix_seconds(),
        "wall_seconds": clock.elapsed().as_secs_f64(),
        "version": env!("CARGO_PKG_VERSION"),
        "argv": std::env::args().collect::<Vec<_>>(),
    });
    write_atomic(&dir.join("meta.json"), &to_json_bytes(&meta)?)?;
    print!("{}", report.summary());
    println!("overall: {} (outputs in {})", if report.passed { "pass" } else { "FAIL" }, dir.display());
    Ok(if report.passed { Outcome::Ok } else { Outcome::VerdictFailed })
}

fn field(action: FieldAction) -> Result<Outcome> {
    match action {
        FieldAction::Dump { cfg: args, out, times, n, extension } => {
            let cfg = load(&args, None)?;
            let sched = cfg.schedule()?;
            let f = build_field(&sched, extension.into())?;
            let times = if times.is_empty() {
                let s = &sched.levels[0].slots[2];
                vec![0.5 * (s.lo_f64() + s.hi_f64())]
            } else {
                times
            };
            for (k, &t) in times.iter().enumerate() {
                f.eval(t, [0.5, 0.5])?;
                for c in 0..2 {
                    let mut grid = ScalarField::from_fn(n, |x| f.eval_unchecked(t, x)[c])?;
                    grid.time = t;
                    write_grid(&out.join(format!("u{}_t{k}", c + 1)), &grid, 0.0)?;
                }
            }
            println!("wrote {} snapshot(s) to {}", times.len(), out.display());
            Ok(Outcome::Ok)
        }
        FieldAction::Norms { cfg: args, out, extension } => {
            let cfg = load(&args, None)?;
            let p = cfg.params()?;
            let sched = cfg.schedule()?;
            let f = build_field(&sched, extension.into())?;
            let pp = match &p.p {
                Exponent::Finite(v) => Some(to_f64(v)),
                Exponent::Infinite => None,
            };
            let report = field_norm_report(&f, to_f64(&p.alpha), pp, None);
            emit(&serde_json::to_value(&report)?, out.as_deref(), "norms.json")?;
            Ok(Outcome::Ok)
        }
    }
}
