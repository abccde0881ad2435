//! Command-line front end: `simulate`, `moments` and `verify`.
//!
//! Exit status is 0 on success, 1 when a verification check fails and 2 for
//! configuration or output errors.

pub mod config;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::moment_ode::{initial_moments, moment_matrix, solve_moment_system};
use crate::observables::{
    empirical_moments, passive_histogram, DEFAULT_HIST_BINS, DEFAULT_HIST_HI, DEFAULT_HIST_LO,
};
use crate::sampler::{InitKind, InitSpec};
use crate::simulator::run_ensemble;

use config::{default_config, PartialConfig, PartialFlags, PartialParams, PartialSchedule, RunConfig};
use output::{
    histogram_file_name, write_histogram_csv, write_json, write_moments_csv, write_oracle_csv,
    CONFIG_FILE, MOMENTS_FILE, ORACLE_FILE, VERDICT_FILE,
};
use verify::{run_suite, suite_defaults, Suite, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kac-bgk",
    version,
    about = "Kinetic Monte Carlo for the two-species Kac system",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble and write moments (and histograms) as CSV.
    Simulate(Overrides),
    /// Evaluate the exact moment equations on the configured time grid.
    Moments(Overrides),
    /// Run a verification suite and write a JSON verdict.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum InitArg {
    UniformSphere,
    TwoTemperature,
    PassiveSpike,
}

impl From<InitArg> for InitKind {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::UniformSphere => Self::UniformSphere,
            InitArg::TwoTemperature => Self::TwoTemperature,
            InitArg::PassiveSpike => Self::PassiveSpike,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON configuration file; flags below take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of passive particles N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of active particles M.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Uniform spacing of sample times, starting at 0.
    #[arg(long)]
    pub sample_dt: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial-data family; standard deviations come from the config file.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub disable_exchange: bool,
    #[arg(long)]
    pub disable_kac: bool,
    #[arg(long)]
    pub record_snapshots: bool,
}

impl Overrides {
    fn as_partial(&self, below: &PartialConfig) -> PartialConfig {
        let init = self.init.map(|kind| {
            let base = below.init.unwrap_or_else(InitSpec::uniform);
            InitSpec {
                kind: kind.into(),
                ..base
            }
        });
        PartialConfig {
            params: PartialParams {
                n_passive: self.n,
                n_active: self.m,
                lambda: self.lambda,
                seed: self.seed,
            },
            init,
            schedule: PartialSchedule {
                t_end: self.t_end,
                sample_dt: self.sample_dt,
                sample_times: None,
            },
            replicas: self.replicas,
            flags: PartialFlags {
                disable_exchange: self.disable_exchange.then_some(true),
                disable_kac: self.disable_kac.then_some(true),
                record_snapshots: self.record_snapshots.then_some(true),
            },
            output_path: self.output.clone(),
            initial_moments: None,
        }
    }

    /// `base`, then the config file, then the flags.
    pub fn resolve(&self, base: PartialConfig) -> Result<RunConfig> {
        let layered = match &self.config {
            Some(path) => base.merge(PartialConfig::load(path)?),
            None => base,
        };
        let flags = self.as_partial(&layered);
        layered.merge(flags).resolve()
    }
}

fn prepare_output(config: &RunConfig) -> Result<&Path> {
    let dir = config.output_path.as_path();
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    write_json(&dir.join(CONFIG_FILE), config)?;
    Ok(dir)
}

/// Simulates the configured ensemble; writes `moments.csv`, one histogram
/// per sample time when snapshots are on, and the effective config.
pub fn cmd_simulate(config: &RunConfig) -> Result<()> {
    config.validate()?;
    if config.replicas < 2 {
        return Err(Error::Config(
            "simulate needs at least 2 replicas for standard errors".into(),
        ));
    }
    let dir = prepare_output(config)?;
    let ens = run_ensemble(
        &config.params,
        &config.init,
        &config.schedule,
        config.replicas,
        &config.options(),
    )?;
    write_moments_csv(&dir.join(MOMENTS_FILE), &empirical_moments(&ens)?)?;
    if config.flags.record_snapshots {
        for (i, &t) in config.schedule.sample_times.iter().enumerate() {
            let hist = passive_histogram(&ens, t, DEFAULT_HIST_LO, DEFAULT_HIST_HI, DEFAULT_HIST_BINS)?;
            write_histogram_csv(&dir.join(histogram_file_name(i)), &hist)?;
        }
    }
    Ok(())
}

/// Evaluates the moment equations on the sample times. The initial moments
/// are the exact expectations under the configured initial law unless the
/// config supplies `initial_moments`.
pub fn cmd_moments(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let init = match config.initial_moments {
        Some(m) => m,
        None => initial_moments(&config.params, &config.init)?,
    };
    let sys = moment_matrix(&config.params)?;
    let points = solve_moment_system(&sys, &init, &config.schedule.sample_times)?;
    let dir = prepare_output(config)?;
    write_oracle_csv(&dir.join(ORACLE_FILE), &points)
}

/// Runs `suite`, prints one line per check and writes `verdict.json`.
pub fn cmd_verify(config: &RunConfig, suite: Suite) -> Result<Verdict> {
    let verdict = run_suite(suite, config)?;
    let dir = prepare_output(config)?;
    for check in &verdict.checks {
        println!("{}", check.line());
    }
    println!(
        "{} suite {}",
        if verdict.passed { "PASS" } else { "FAIL" },
        suite.name()
    );
    write_json(&dir.join(VERDICT_FILE), &verdict)?;
    Ok(verdict)
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_CONFIG
}

/// Executes a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Simulate(o) => o
            .resolve(default_config())
            .and_then(|c| cmd_simulate(&c))
            .map(|_| EXIT_OK),
        Command::Moments(o) => o
            .resolve(default_config())
            .and_then(|c| cmd_moments(&c))
            .map(|_| EXIT_OK),
        Command::Verify { suite, overrides } => overrides
            .resolve(suite_defaults(*suite))
            .and_then(|c| cmd_verify(&c, *suite))
            .map(|v| if v.passed { EXIT_OK } else { EXIT_CHECK_FAILED }),
    };
    outcome.unwrap_or_else(|e| report(&e))
}
