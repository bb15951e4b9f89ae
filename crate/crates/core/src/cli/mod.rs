//! Command-line front end: `hrg <command> [flags]`.
//!
//! The configuration is a JSON file (`--config`) with flag overrides; flags
//! win. Exit codes: 0 success, 1 selftest failure, 2 configuration error,
//! 3 numerical failure.

pub mod commands;
pub mod config;
pub mod provenance;
pub mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::HrgError;
use config::{BackendChoice, BulkChoice, Preset, RunConfig, SampleMode};
use provenance::{write_provenance, Provenance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hrg", version, about = "RG analysis of hierarchical phi^4 models")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendChoice>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the RG map from a bare potential.
    Flow {
        #[arg(long, allow_negative_numbers = true)]
        g: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// `bare`, `zero` or a `phi,W` CSV.
        #[arg(long)]
        v0: Option<String>,
    },
    /// Solve for a fixed point and its spectrum.
    Fixpoint {
        /// `seed`, `zero` or a `phi,W` CSV.
        #[arg(long)]
        guess: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated continuation values.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
    /// Bisect for the critical mass at fixed quartic coupling.
    CriticalMu {
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sample the tree field and fit correlation exponents.
    Sample {
        #[arg(long, value_enum)]
        mode: Option<SampleMode>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        sweeps: Option<usize>,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        /// Use the critical mass for `g`.
        #[arg(long)]
        critical: bool,
    },
    /// Cumulant series of a smeared field or squared field.
    Observable {
        #[arg(long)]
        power: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        amplitude: Option<f64>,
        #[arg(long)]
        support_level: Option<usize>,
        #[arg(long)]
        n_uv: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum)]
        bulk: Option<BulkChoice>,
        #[arg(long, allow_negative_numbers = true)]
        y: Option<f64>,
    },
    /// Run the invariant suite.
    Selftest {
        #[arg(long)]
        force_failure: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Flow { .. } => "flow",
            Command::Fixpoint { .. } => "fixpoint",
            Command::CriticalMu { .. } => "critical-mu",
            Command::Sample { .. } => "sample",
            Command::Observable { .. } => "observable",
            Command::Selftest { .. } => "selftest",
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Loads the configuration file, if any, and applies the flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, HrgError> {
    let mut cfg = match &cli.common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let c = &cli.common;
    set(&mut cfg.out, c.out.clone());
    set(&mut cfg.seed, c.seed);
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    set(&mut cfg.model.preset, c.preset);
    set(&mut cfg.model.epsilon, c.epsilon);
    set(&mut cfg.backend, c.backend);
    match &cli.command {
        Command::Flow { g, mu, steps, v0 } => {
            set(&mut cfg.flow.g, *g);
            set(&mut cfg.flow.mu, *mu);
            set(&mut cfg.flow.steps, *steps);
            set(&mut cfg.flow.v0, v0.clone());
        }
        Command::Fixpoint { guess, tol, epsilons } => {
            set(&mut cfg.fixpoint.guess, guess.clone());
            set(&mut cfg.fixpoint.tol, *tol);
            set(&mut cfg.fixpoint.epsilons, epsilons.clone());
        }
        Command::CriticalMu { g, tol } => {
            set(&mut cfg.critical_mu.g, *g);
            set(&mut cfg.critical_mu.tol, *tol);
        }
        Command::Sample {
            mode,
            depth,
            replicas,
            sweeps,
            g,
            mu,
            critical,
        } => {
            set(&mut cfg.sample.mode, *mode);
            set(&mut cfg.sample.depth, *depth);
            set(&mut cfg.sample.replicas, *replicas);
            set(&mut cfg.sample.sweeps, *sweeps);
            set(&mut cfg.sample.g, *g);
            set(&mut cfg.sample.mu, *mu);
            cfg.sample.critical |= *critical;
        }
        Command::Observable {
            power,
            amplitude,
            support_level,
            n_uv,
            depth,
            bulk,
            y,
        } => {
            let o = &mut cfg.observable;
            set(&mut o.power, *power);
            set(&mut o.amplitude, *amplitude);
            set(&mut o.support_level, *support_level);
            set(&mut o.n_uv, *n_uv);
            set(&mut o.depth, *depth);
            set(&mut o.bulk, *bulk);
            if y.is_some() {
                o.y = *y;
            }
        }
        Command::Selftest { force_failure } => cfg.selftest.force_failure |= *force_failure,
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Exit code for an error: configuration problems give 2, everything that
/// fails during a computation gives 3.
pub fn exit_code(e: &HrgError) -> i32 {
    match e {
        HrgError::InvalidParameter(_)
        | HrgError::UnsupportedBackend(_)
        | HrgError::MemoryGuard(_)
        | HrgError::Json(_)
        | HrgError::Io(_) => EXIT_CONFIG,
        HrgError::AtEpsilon { source, .. } => exit_code(source).max(EXIT_NUMERICAL),
        _ => EXIT_NUMERICAL,
    }
}

/// Runs a command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: configuration: {e}");
            return EXIT_CONFIG;
        }
    };
    let threads = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("error: cannot create {}: {e}", cfg.out.display());
        return EXIT_CONFIG;
    }
    let dir = cfg.out.clone();
    let start = Instant::now();
    let name = cli.command.name();
    let result = pool.install(|| match &cli.command {
        Command::Flow { .. } => commands::cmd_flow(&cfg, &dir).map(|o| (o, None)),
        Command::Fixpoint { .. } => commands::cmd_fixpoint(&cfg, &dir).map(|o| (o, None)),
        Command::CriticalMu { .. } => commands::cmd_critical_mu(&cfg, &dir).map(|o| (o, None)),
        Command::Sample { .. } => commands::cmd_sample(&cfg, &dir).map(|o| (o, None)),
        Command::Observable { .. } => commands::cmd_observable(&cfg, &dir).map(|o| (o, None)),
        Command::Selftest { .. } => commands::cmd_selftest(&cfg, &dir).map(|(o, c)| (o, Some(c))),
    });
    let (outputs, code) = match result {
        Ok((outputs, checks)) => {
            let mut code = EXIT_OK;
            if let Some(checks) = checks {
                for c in &checks {
                    println!("{:<4} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                }
                if checks.iter().any(|c| !c.passed) {
                    code = EXIT_SELFTEST;
                }
            }
            (outputs, code)
        }
        Err(e) => {
            eprintln!("error: {name}: {e}");
            (Vec::new(), exit_code(&e))
        }
    };
    let prov = Provenance {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        config: &cfg,
        seed: cfg.seed,
        threads,
        outputs,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    if let Err(e) = write_provenance(&dir, &prov) {
        eprintln!("error: cannot write provenance: {e}");
        return code.max(EXIT_CONFIG);
    }
    code
}

/// Parses arguments and runs; clap usage errors map to the config code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
