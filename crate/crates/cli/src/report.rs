//! JSON phase report and comparison against a reference table.

use serde::{Deserialize, Serialize};

use polariphase::analysis::{PipelineReport, TargetAnalysis};

use crate::config::fit_mode_name;

/// Rows whose polarizations differ by less than this are the same target.
pub const R_MATCH_TOL: f64 = 1e-9;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub r: f64,
    #[serde(default)]
    pub phase_rad: Option<f64>,
    #[serde(default)]
    pub phase_sigma_rad: Option<f64>,
    #[serde(default)]
    pub phase_syst_rad: Option<f64>,
    #[serde(default)]
    pub phase_theory_rad: Option<f64>,
    #[serde(default)]
    pub fit_chi2_reduced: Option<f64>,
    /// Gaussian-equivalent significance of the λ/2 `{cos η, sin η}` terms.
    #[serde(default)]
    pub second_order_sigma: Option<f64>,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub fit_mode: Option<String>,
    #[serde(default)]
    pub count_mode: Option<String>,
    pub rows: Vec<ReportRow>,
}

fn row_from(r: f64, t: &TargetAnalysis) -> ReportRow {
    let p = &t.phase;
    ReportRow {
        r: round12(r),
        phase_rad: Some(round12(p.phi)),
        phase_sigma_rad: Some(round12(p.sigma_phi)),
        phase_syst_rad: Some(round12(p.sigma_syst)),
        phase_theory_rad: p.phi_theory.map(round12),
        fit_chi2_reduced: Some(round12(t.fit.chi2_reduced)),
        second_order_sigma: t.fit.second_order_significance().map(round12),
        flags: p.flags.iter().map(|f| f.as_str().to_string()).collect(),
        error: None,
    }
}

impl Report {
    pub fn from_pipeline(p: &PipelineReport, expectation: bool) -> Self {
        Self {
            r0: Some(round12(p.r0)),
            fit_mode: Some(fit_mode_name(p.fit_mode).to_string()),
            count_mode: Some(if expectation { "expectation" } else { "sampled" }.to_string()),
            rows: p
                .rows
                .iter()
                .map(|row| match &row.outcome {
                    Ok(t) => row_from(row.r, t),
                    Err(e) => ReportRow {
                        r: round12(row.r),
                        error: Some(e.to_string()),
                        ..ReportRow::default()
                    },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn row(&self, r: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|row| (row.r - r).abs() < R_MATCH_TOL)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Pass,
    Fail,
    /// The report has no usable phase for this reference row.
    Missing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowComparison {
    pub r: f64,
    pub phase: Option<f64>,
    pub reference: f64,
    pub abs_diff: Option<f64>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub tol: f64,
    pub rows: Vec<RowComparison>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.status == RowStatus::Pass)
    }
}

/// Checks every reference row carrying a phase against the report.
pub fn compare(report: &Report, reference: &Report, tol: f64) -> Comparison {
    let rows = reference
        .rows
        .iter()
        .filter_map(|want| {
            let reference = want.phase_rad?;
            let phase = report.row(want.r).and_then(|row| row.phase_rad);
            let abs_diff = phase.map(|p| (p - reference).abs());
            let status = match abs_diff {
                None => RowStatus::Missing,
                Some(d) if d <= tol => RowStatus::Pass,
                Some(_) => RowStatus::Fail,
            };
            Some(RowComparison {
                r: want.r,
                phase,
                reference,
                abs_diff,
                status,
            })
        })
        .collect();
    Comparison { tol, rows }
}
