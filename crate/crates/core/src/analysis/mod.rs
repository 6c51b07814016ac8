//! From detector counts to the mixed-state phase.

mod extract;
mod fit;
mod mixing;
mod pipeline;

use thiserror::Error;

use crate::beamline::BeamlineError;
use crate::counting::CountingError;

pub use extract::{
    phase_from_extrema_mixed, phase_from_extrema_pure, phase_from_offsets, ExtremaOffsets, PhaseFlag, PhaseMethod,
    PhaseResult, CLIP_SIGMAS, DENOMINATOR_TOL, RADICAND_ABS_TOL,
};
pub use fit::{chi2_2dof_to_sigma, fit_harmonic, required_span, ExtremaEstimate, FitResult, RANK_TOL};
pub use mixing::{mix_scans, normalize_counts, CountMode, IntensityScan, MixingSpec, Sample, GRID_TOL};
pub use pipeline::{
    analyze_mixed, bootstrap_replica, channel_scans, correct_contamination, model_weighted, run_pipeline, FitMode,
    PipelineOptions, PipelineReport, PipelineRow, TargetAnalysis, Weighting, DEFAULT_BOOTSTRAP_REPLICAS,
    MODEL_WEIGHT_PASSES, SECOND_ORDER_AMPLITUDE_FLOOR, SECOND_ORDER_FLAG_SIGMAS,
};

/// Coefficient indices into [`FitResult::coefficients`].
pub mod coef {
    pub use super::fit::{A0, B1, B2, C1, C2, H1, H2};
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("scan grids differ at point {index}")]
    GridMismatch { index: usize },
    #[error("live times differ between channels ({off} s vs {on} s)")]
    LiveTimeMismatch { off: f64, on: f64 },
    #[error("target polarization {r_target} is not reachable from r0 = {r0}")]
    WeightOutOfRange { r_target: f64, r0: f64 },
    #[error("design matrix is rank deficient (singular value ratio {condition:.3e})")]
    RankDeficient { condition: f64 },
    #[error("scan spans {span:.4} rad in eta, at least {required:.4} rad needed")]
    InsufficientSpan { span: f64, required: f64 },
    #[error("{got} scan points, at least {needed} needed")]
    TooFewPoints { got: usize, needed: usize },
    #[error("phase radicand denominator vanishes ({denominator:.3e})")]
    DegenerateDenominator { denominator: f64 },
    #[error("phase radicand {radicand:.6} lies outside [0, 1] by more than 3 sigma (sigma = {sigma:.3e})")]
    OutOfPhysicalRange { radicand: f64, sigma: f64 },
    #[error("polarization {0} outside [0, 1]")]
    PolarizationOutOfRange(f64),
    #[error("contamination fraction {0} cannot be corrected")]
    CannotCorrect(f64),
    #[error(transparent)]
    Beamline(#[from] BeamlineError),
    #[error(transparent)]
    Counting(#[from] CountingError),
}
