//! Counts → normalized scans → mixing → fit → phase, per target polarization.

use rayon::prelude::*;

use crate::beamline::{Beamline, BeamlineConfig, DEFAULT_INHOMOGENEITY_BETA_MAX};
use crate::counting::{bootstrap_rng, sample_poisson, Channel, CountingPlan, ScanRecord};
use crate::spin::mixed_state_phase;

use super::extract::{phase_from_extrema_mixed, phase_from_extrema_pure, PhaseFlag, PhaseResult};
use super::fit::{fit_harmonic, FitResult};
use super::mixing::{mix_scans, normalize_counts, CountMode, IntensityScan, MixingSpec};
use super::AnalysisError;

/// Default number of bootstrap replicas when bootstrap errors are requested.
pub const DEFAULT_BOOTSTRAP_REPLICAS: usize = 1000;

/// Significance above which the second-order terms are reported.
pub const SECOND_ORDER_FLAG_SIGMAS: f64 = 2.0;

/// `{cos η, sin η}` amplitudes below this are round-off, whatever their
/// formal significance.
pub const SECOND_ORDER_AMPLITUDE_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    /// Fit the observed intensities as they are.
    Agnostic,
    /// Remove the known λ/2 background before fitting.
    Corrected,
}

/// Source of the per-point errors used by the fit in sampled mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// `σ = √counts` as recorded.
    Observed,
    /// `σ = √(expected counts)` from a preliminary fit of each channel.
    /// Avoids the downward pull of observed-count weights on low-count points.
    Model,
}

/// Reweighting passes in [`Weighting::Model`].
pub const MODEL_WEIGHT_PASSES: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    /// Polarizations analyzed after the incident `r0`.
    pub r_targets: Vec<f64>,
    pub fit_mode: FitMode,
    pub include_second_order: bool,
    pub count_mode: CountMode,
    pub weighting: Weighting,
    /// Poisson bootstrap replicas; zero keeps the propagated errors.
    pub bootstrap_replicas: usize,
    /// Half-width of the η scale band used for `sigma_syst`; zero disables it.
    pub systematic_beta: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            r_targets: vec![0.8, 0.6, 0.3],
            fit_mode: FitMode::Agnostic,
            include_second_order: true,
            count_mode: CountMode::Sampled,
            weighting: Weighting::Model,
            bootstrap_replicas: 0,
            systematic_beta: DEFAULT_INHOMOGENEITY_BETA_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetAnalysis {
    pub phase: PhaseResult,
    pub fit: FitResult,
    /// Flipper-off weight used for the mixed scan.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRow {
    pub r: f64,
    pub outcome: Result<TargetAnalysis, AnalysisError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineReport {
    pub r0: f64,
    pub fit_mode: FitMode,
    pub rows: Vec<PipelineRow>,
}

impl PipelineReport {
    pub fn row(&self, r: f64) -> Option<&PipelineRow> {
        self.rows.iter().find(|row| row.r == r)
    }
}

/// Undo the λ/2 contamination of a mixed scan:
/// `I₁ = (I − ε·⟨I₂⟩)/(1 − ε)`, with `⟨I₂⟩` the η-average of the
/// second-order probability mixed with the same weight.
pub fn correct_contamination(
    scan: &IntensityScan,
    cfg: &BeamlineConfig,
    weight: f64,
) -> Result<IntensityScan, AnalysisError> {
    let eps = cfg.contamination_eps;
    if eps == 0.0 {
        return Ok(scan.clone());
    }
    if !(eps < 1.0) {
        return Err(AnalysisError::CannotCorrect(eps));
    }
    let beamline = Beamline::new(cfg.clone())?;
    let dc = weight * beamline.second_order_mean(false) + (1.0 - weight) * beamline.second_order_mean(true);
    Ok(scan.affine(eps * dc, 1.0 - eps))
}

fn theory(cfg: &BeamlineConfig, r: f64, out: &mut PhaseResult) {
    match mixed_state_phase(r, &cfg.coil.params()) {
        Ok(m) => {
            out.phi_theory = Some(m.phi.abs());
            if m.singular {
                out.flag(PhaseFlag::SingularTheory);
            }
        }
        Err(_) => out.flag(PhaseFlag::NoTheory),
    }
}

fn extract(fit: &FitResult, r: f64) -> Result<PhaseResult, AnalysisError> {
    if r == 1.0 {
        phase_from_extrema_pure(&fit.extrema)
    } else {
        phase_from_extrema_mixed(&fit.extrema, r)
    }
}

/// Fits a mixed (and, if requested, corrected) scan and extracts its phase.
pub fn analyze_mixed(
    mixed: &IntensityScan,
    r: f64,
    cfg: &BeamlineConfig,
    opts: &PipelineOptions,
) -> Result<TargetAnalysis, AnalysisError> {
    let fit = fit_harmonic(mixed, opts.include_second_order)?;
    let mut phase = extract(&fit, r)?;
    theory(cfg, r, &mut phase);
    let amplitude = fit.second_order_terms().map_or(0.0, |(c1, c2)| c1.hypot(c2));
    if amplitude > SECOND_ORDER_AMPLITUDE_FLOOR
        && fit
            .second_order_significance()
            .is_some_and(|z| z > SECOND_ORDER_FLAG_SIGMAS)
    {
        phase.flag(PhaseFlag::SecondOrderDetected);
    }
    let beta = opts.systematic_beta;
    if beta > 0.0 {
        phase.sigma_syst = [1.0 + beta, 1.0 - beta]
            .iter()
            .filter_map(|&k| {
                let f = fit_harmonic(&mixed.with_eta_scaled(k), opts.include_second_order).ok()?;
                extract(&f, r).ok()
            })
            .map(|p| (p.phi - phase.phi).abs())
            .fold(0.0, f64::max);
    }
    Ok(TargetAnalysis {
        phase,
        fit,
        weight: 0.0,
    })
}

fn analyze_target(
    off: &IntensityScan,
    on: &IntensityScan,
    r: f64,
    cfg: &BeamlineConfig,
    opts: &PipelineOptions,
) -> Result<TargetAnalysis, AnalysisError> {
    let spec = MixingSpec::new(r, cfg.r0)?;
    let mut mixed = mix_scans(off, on, &spec)?;
    if opts.fit_mode == FitMode::Corrected {
        mixed = correct_contamination(&mixed, cfg, spec.weight())?;
    }
    let mut out = analyze_mixed(&mixed, r, cfg, opts)?;
    out.weight = spec.weight();
    Ok(out)
}

/// Normalized flipper-off and flipper-on scans.
pub fn channel_scans(records: &[ScanRecord], plan: &CountingPlan, mode: CountMode) -> (IntensityScan, IntensityScan) {
    (
        normalize_counts(records, plan, Channel::Off, mode),
        normalize_counts(records, plan, Channel::On, mode),
    )
}

/// Replaces the errors of a sampled channel scan by `√(expected counts)`
/// from its own harmonic fit. A scan that cannot be fitted is returned as is.
pub fn model_weighted(scan: &IntensityScan, plan: &CountingPlan, include_second_order: bool) -> IntensityScan {
    let mut out = scan.clone();
    for _ in 0..MODEL_WEIGHT_PASSES {
        let Ok(fit) = fit_harmonic(&out, include_second_order) else {
            return out;
        };
        for s in &mut out.samples {
            let expected = plan.mean_counts(fit.evaluate(s.eta));
            s.sigma = expected.max(1.0).sqrt() / plan.counts_scale;
        }
    }
    out
}

fn prepared_channels(
    records: &[ScanRecord],
    plan: &CountingPlan,
    opts: &PipelineOptions,
) -> (IntensityScan, IntensityScan) {
    let (off, on) = channel_scans(records, plan, opts.count_mode);
    if opts.count_mode == CountMode::Expectation || opts.weighting == Weighting::Observed {
        return (off, on);
    }
    (
        model_weighted(&off, plan, opts.include_second_order),
        model_weighted(&on, plan, opts.include_second_order),
    )
}

fn targets(cfg: &BeamlineConfig, opts: &PipelineOptions) -> Vec<f64> {
    std::iter::once(cfg.r0).chain(opts.r_targets.iter().copied()).collect()
}

/// Runs the analysis at `r0` and at every requested target.
///
/// `cfg` describes the apparatus as the analysis assumes it; `plan` supplies
/// the count normalization and, for the bootstrap, the seed. Failures at a
/// single target are reported in its row.
pub fn run_pipeline(
    records: &[ScanRecord],
    plan: &CountingPlan,
    cfg: &BeamlineConfig,
    opts: &PipelineOptions,
) -> Result<PipelineReport, AnalysisError> {
    plan.validate()?;
    cfg.validate()?;
    let (off, on) = prepared_channels(records, plan, opts);
    let rs = targets(cfg, opts);
    let mut rows: Vec<PipelineRow> = rs
        .iter()
        .map(|&r| PipelineRow {
            r,
            outcome: analyze_target(&off, &on, r, cfg, opts),
        })
        .collect();

    if opts.bootstrap_replicas > 0 {
        let spreads = bootstrap_sigmas(records, plan, cfg, opts, &rs);
        for (row, sigma) in rows.iter_mut().zip(spreads) {
            if let (Ok(t), Some(s)) = (&mut row.outcome, sigma) {
                t.phase.sigma_phi = s;
                t.phase.flag(PhaseFlag::BootstrapSigma);
            }
        }
    }

    Ok(PipelineReport {
        r0: cfg.r0,
        fit_mode: opts.fit_mode,
        rows,
    })
}

/// Poisson-resampled replicas of `records`, drawn around the recorded counts.
pub fn bootstrap_replica(records: &[ScanRecord], seed: u64, replica: usize) -> Vec<ScanRecord> {
    records
        .iter()
        .enumerate()
        .map(|(i, rec)| ScanRecord {
            counts_off: sample_poisson(&mut bootstrap_rng(seed, replica, i, Channel::Off), rec.counts_off),
            counts_on: sample_poisson(&mut bootstrap_rng(seed, replica, i, Channel::On), rec.counts_on),
            ..rec.clone()
        })
        .collect()
}

/// Sample standard deviation of the phase over bootstrap replicas, per
/// target; `None` where fewer than two replicas succeeded.
fn bootstrap_sigmas(
    records: &[ScanRecord],
    plan: &CountingPlan,
    cfg: &BeamlineConfig,
    opts: &PipelineOptions,
    rs: &[f64],
) -> Vec<Option<f64>> {
    let inner = PipelineOptions {
        bootstrap_replicas: 0,
        systematic_beta: 0.0,
        count_mode: CountMode::Sampled,
        ..opts.clone()
    };
    let phases: Vec<Vec<Option<f64>>> = (0..opts.bootstrap_replicas)
        .into_par_iter()
        .map(|b| {
            let replica = bootstrap_replica(records, plan.seed, b);
            let (off, on) = prepared_channels(&replica, plan, &inner);
            rs.iter()
                .map(|&r| analyze_target(&off, &on, r, cfg, &inner).ok().map(|t| t.phase.phi))
                .collect()
        })
        .collect();
    (0..rs.len())
        .map(|k| {
            let xs: Vec<f64> = phases.iter().filter_map(|p| p[k]).collect();
            if xs.len() < 2 {
                return None;
            }
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
        })
        .collect()
}
