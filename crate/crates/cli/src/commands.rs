//! The four subcommands: simulate, analyze, compare, full.

use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use polariphase::analysis::{run_pipeline, CountMode, PipelineOptions};
use polariphase::{expectation_scan, simulate_scan, ScanRecord};

use crate::config::{ExperimentConfig, Overrides};
use crate::report::{compare, Comparison, Report, RowStatus};
use crate::scan_csv::{has_fractional_counts, read_scan, write_scan};

pub const NO_COLOR_ENV: &str = "POLARIPHASE_NO_COLOR";

/// Process exit status of a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CompareFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::CompareFailed => 1,
        }
    }
}

/// Exit code for usage, configuration, schema and I/O errors.
pub const ERROR_EXIT_CODE: u8 = 2;

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("config {}", path.display()))?;
    cfg.apply(overrides)
        .with_context(|| format!("config {}", path.display()))?;
    Ok(cfg)
}

/// Synthetic scan for `cfg`: sampled counts, or expectations in expectation mode.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<ScanRecord>> {
    let beamline = cfg.simulated_beamline();
    let records = if cfg.expectation {
        expectation_scan(&beamline, &cfg.counting)
    } else {
        simulate_scan(&beamline, &cfg.counting)
    };
    Ok(records?)
}

/// Runs the analysis pipeline on `records` against the nominal apparatus.
pub fn analyze(cfg: &ExperimentConfig, records: &[ScanRecord]) -> Result<Report> {
    let expectation = cfg.expectation || has_fractional_counts(records);
    let opts = PipelineOptions {
        count_mode: if expectation {
            CountMode::Expectation
        } else {
            CountMode::Sampled
        },
        ..cfg.analysis.clone()
    };
    let pipeline = run_pipeline(records, &cfg.counting, &cfg.beamline, &opts)?;
    Ok(Report::from_pipeline(&pipeline, expectation))
}

pub fn read_scan_file(path: &Path) -> Result<Vec<ScanRecord>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_scan(file).with_context(|| format!("scan {}", path.display()))
}

pub fn write_scan_file(path: &Path, records: &[ScanRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_scan(&mut buf, records)?;
    write_file(path, &buf)
}

pub fn read_report_file(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Report::from_json(&text).with_context(|| format!("report {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn use_color() -> bool {
    std::env::var_os(NO_COLOR_ENV).is_none() && std::io::stdout().is_terminal()
}

fn paint(text: &str, ansi: &str, color: bool) -> String {
    if color {
        format!("\x1b[{ansi}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

/// Human-readable comparison table.
pub fn render_comparison(c: &Comparison, color: bool) -> String {
    let mut s = format!(
        "{:>8}  {:>12}  {:>12}  {:>12}  status (tol {})\n",
        "r", "phase_rad", "reference", "|diff|", c.tol
    );
    for row in &c.rows {
        let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        let status = match row.status {
            RowStatus::Pass => paint("pass", "32", color),
            RowStatus::Fail => paint("FAIL", "31", color),
            RowStatus::Missing => paint("MISSING", "31", color),
        };
        s.push_str(&format!(
            "{:>8}  {:>12}  {:>12.6}  {:>12}  {status}\n",
            row.r,
            fmt(row.phase),
            row.reference,
            fmt(row.abs_diff)
        ));
    }
    let verdict = if c.passed() {
        paint("all rows within tolerance", "32", color)
    } else {
        paint("comparison failed", "31", color)
    };
    s.push_str(&verdict);
    s.push('\n');
    s
}

/// Human-readable phase summary.
pub fn render_report(report: &Report) -> String {
    let mut s = String::new();
    for row in &report.rows {
        match (row.phase_rad, &row.error) {
            (Some(phi), _) => {
                s.push_str(&format!(
                    "r = {:<6} phase = {phi:.4} ± {:.4} (syst {:.4}) rad, theory {}",
                    row.r,
                    row.phase_sigma_rad.unwrap_or(f64::NAN),
                    row.phase_syst_rad.unwrap_or(0.0),
                    row.phase_theory_rad.map_or("-".to_string(), |t| format!("{t:.4}")),
                ));
                if !row.flags.is_empty() {
                    s.push_str(&format!(" [{}]", row.flags.join(", ")));
                }
                s.push('\n');
            }
            (None, Some(e)) => s.push_str(&format!("r = {:<6} error: {e}\n", row.r)),
            (None, None) => s.push_str(&format!("r = {:<6} no result\n", row.r)),
        }
    }
    s
}

pub fn cmd_simulate<W: Write>(
    config: &Path,
    out: Option<&Path>,
    overrides: &Overrides,
    stdout: &mut W,
) -> Result<Status> {
    let cfg = load_config(config, overrides)?;
    let records = simulate(&cfg)?;
    match out.map(Path::to_path_buf).or(cfg.scan_csv.clone()) {
        Some(path) => {
            write_scan_file(&path, &records)?;
            writeln!(stdout, "wrote {} scan points to {}", records.len(), path.display())?;
        }
        None => write_scan(&mut *stdout, &records)?,
    }
    Ok(Status::Ok)
}

pub fn cmd_analyze<W: Write>(
    config: &Path,
    scan: Option<&Path>,
    out: Option<&Path>,
    overrides: &Overrides,
    stdout: &mut W,
) -> Result<Status> {
    let cfg = load_config(config, overrides)?;
    let scan = scan
        .map(Path::to_path_buf)
        .or(cfg.scan_csv.clone())
        .context("no scan given: pass --scan or set scan_csv in the config")?;
    let records = read_scan_file(&scan)?;
    let report = analyze(&cfg, &records)?;
    match out.map(Path::to_path_buf).or(cfg.report_json.clone()) {
        Some(path) => {
            write_file(&path, report.to_json().as_bytes())?;
            write!(stdout, "{}", render_report(&report))?;
            writeln!(stdout, "wrote report to {}", path.display())?;
        }
        None => write!(stdout, "{}", report.to_json())?,
    }
    Ok(Status::Ok)
}

pub fn cmd_compare<W: Write>(report: &Path, reference: &Path, tol: f64, stdout: &mut W) -> Result<Status> {
    anyhow::ensure!(
        tol >= 0.0 && tol.is_finite(),
        "tolerance must be a non-negative number, got {tol}"
    );
    let c = compare(&read_report_file(report)?, &read_report_file(reference)?, tol);
    write!(stdout, "{}", render_comparison(&c, use_color()))?;
    Ok(if c.passed() { Status::Ok } else { Status::CompareFailed })
}

/// Paths written by [`cmd_full`].
pub fn full_outputs(out_dir: &Path) -> (PathBuf, PathBuf) {
    (out_dir.join("scan.csv"), out_dir.join("report.json"))
}

pub fn cmd_full<W: Write>(
    config: &Path,
    out_dir: &Path,
    reference: Option<&Path>,
    tol: Option<f64>,
    overrides: &Overrides,
    stdout: &mut W,
) -> Result<Status> {
    let cfg = load_config(config, overrides)?;
    let (scan_path, report_path) = full_outputs(out_dir);
    let records = simulate(&cfg)?;
    write_scan_file(&scan_path, &records)?;
    let report = analyze(&cfg, &records)?;
    write_file(&report_path, report.to_json().as_bytes())?;
    write!(stdout, "{}", render_report(&report))?;
    writeln!(stdout, "wrote {} and {}", scan_path.display(), report_path.display())?;

    let Some(reference) = reference.map(Path::to_path_buf).or(cfg.reference_json.clone()) else {
        return Ok(Status::Ok);
    };
    let tol = tol.unwrap_or(cfg.compare_tol_rad);
    anyhow::ensure!(
        tol >= 0.0 && tol.is_finite(),
        "tolerance must be a non-negative number, got {tol}"
    );
    let c = compare(&report, &read_report_file(&reference)?, tol);
    write!(stdout, "{}", render_comparison(&c, use_color()))?;
    Ok(if c.passed() { Status::Ok } else { Status::CompareFailed })
}
