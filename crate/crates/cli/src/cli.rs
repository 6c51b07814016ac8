//! Argument parsing and dispatch.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use polariphase::analysis::FitMode;

use crate::commands::{cmd_analyze, cmd_compare, cmd_full, cmd_simulate, Status};
use crate::config::{parse_fit_mode, parse_list, Overrides, DEFAULT_COMPARE_TOL_RAD};

#[derive(Debug, Parser)]
#[command(
    name = "polariphase",
    version,
    about = "Simulate neutron polarimetry scans and extract the mixed-state relative phase"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic scan CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Scan CSV path; defaults to scan_csv from the config, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Extract phases from a scan CSV into a JSON report.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Scan CSV path; defaults to scan_csv from the config.
        #[arg(long)]
        scan: Option<PathBuf>,
        /// Report path; defaults to report_json from the config, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Compare a report against a reference table.
    Compare {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Largest accepted |Δphase| in rad.
        #[arg(long, default_value_t = DEFAULT_COMPARE_TOL_RAD)]
        tol: f64,
    },
    /// Simulate, analyze and optionally compare in one go.
    Full {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for scan.csv and report.json.
        #[arg(long)]
        out: PathBuf,
        /// Reference table; defaults to reference_json from the config.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Largest accepted |Δphase| in rad; defaults to compare_tol_rad.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
}

#[derive(Debug, Default, Args)]
pub struct OverrideArgs {
    /// Write or treat counts as noise-free expectations.
    #[arg(long)]
    pub expectation: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// λ/2 contamination fraction.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated polarizations analyzed after r0.
    #[arg(long, value_parser = parse_targets, allow_hyphen_values = true)]
    pub r_targets: Option<Targets>,
    #[arg(long, value_parser = parse_mode)]
    pub fit_mode: Option<FitMode>,
    /// Bootstrap replicas for the phase error; 0 disables.
    #[arg(long)]
    pub bootstrap: Option<usize>,
}

/// Parsed `--r-targets` list.
#[derive(Clone, Debug, PartialEq)]
pub struct Targets(pub Vec<f64>);

fn parse_targets(v: &str) -> Result<Targets, String> {
    parse_list(v).map(Targets)
}

fn parse_mode(v: &str) -> Result<FitMode, String> {
    parse_fit_mode(v).ok_or_else(|| format!("expected agnostic or corrected, got `{v}`"))
}

impl OverrideArgs {
    pub fn to_overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            eps: self.eps,
            r_targets: self.r_targets.as_ref().map(|t| t.0.clone()),
            fit_mode: self.fit_mode,
            bootstrap: self.bootstrap,
            expectation: self.expectation,
        }
    }
}

pub fn run<W: Write>(cli: &Cli, stdout: &mut W) -> Result<Status> {
    match &cli.command {
        Command::Simulate { config, out, overrides } => {
            cmd_simulate(config, out.as_deref(), &overrides.to_overrides(), stdout)
        }
        Command::Analyze {
            config,
            scan,
            out,
            overrides,
        } => cmd_analyze(
            config,
            scan.as_deref(),
            out.as_deref(),
            &overrides.to_overrides(),
            stdout,
        ),
        Command::Compare { report, reference, tol } => cmd_compare(report, reference, *tol, stdout),
        Command::Full {
            config,
            out,
            reference,
            tol,
            overrides,
        } => cmd_full(
            config,
            out,
            reference.as_deref(),
            *tol,
            &overrides.to_overrides(),
            stdout,
        ),
    }
}
