//! Weighted linear least squares on a truncated Fourier basis in `η`.
//!
//! The first-order intensity depends on `η` only through
//! `sin²(ζ + η) = (1 − cos 2(ζ + η))/2`, so its modulation lives at `2η`.
//! λ/2 neutrons precess half as far; their intensity carries harmonics at
//! `η` and `η/2` and none at `2η`. Basis columns, in order:
//!
//! ```text
//! 1, cos 2η, sin 2η [, cos η, sin η, cos η/2, sin η/2]
//! ```

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc_inv;

use super::mixing::IntensityScan;
use super::AnalysisError;

/// Singular-value ratio below which the design matrix counts as singular.
pub const RANK_TOL: f64 = 1e-10;

/// Coefficient indices.
pub const A0: usize = 0;
pub const B1: usize = 1;
pub const B2: usize = 2;
pub const C1: usize = 3;
pub const C2: usize = 4;
pub const H1: usize = 5;
pub const H2: usize = 6;

fn basis(eta: f64, second_order: bool) -> Vec<f64> {
    let (s2, c2) = (2.0 * eta).sin_cos();
    if !second_order {
        return vec![1.0, c2, s2];
    }
    let (s1, c1) = eta.sin_cos();
    let (sh, ch) = (0.5 * eta).sin_cos();
    vec![1.0, c2, s2, c1, s1, ch, sh]
}

/// Fitted intensity extrema `a0 ∓ √(b1² + b2²)` and their covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremaEstimate {
    pub min: f64,
    pub max: f64,
    pub var_min: f64,
    pub var_max: f64,
    pub cov: f64,
}

impl ExtremaEstimate {
    /// Extrema known without error.
    pub fn exact(min: f64, max: f64) -> Self {
        Self {
            min,
            max,
            var_min: 0.0,
            var_max: 0.0,
            cov: 0.0,
        }
    }

    pub fn sigma_min(&self) -> f64 {
        self.var_min.sqrt()
    }

    pub fn sigma_max(&self) -> f64 {
        self.var_max.sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    /// Coefficients in basis order (see module docs).
    pub coefficients: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub include_second_order: bool,
    pub extrema: ExtremaEstimate,
    /// `χ²/dof`, or the residual variance for an unweighted fit.
    pub chi2_reduced: f64,
    pub dof: usize,
    /// False when the fit fell back to unit weights.
    pub weighted: bool,
}

impl FitResult {
    pub fn a0(&self) -> f64 {
        self.coefficients[A0]
    }

    /// `√(b1² + b2²)`, the amplitude of the `2η` modulation.
    pub fn first_order_amplitude(&self) -> f64 {
        self.coefficients[B1].hypot(self.coefficients[B2])
    }

    /// `(c1, c2)`, the `cos η` and `sin η` coefficients.
    pub fn second_order_terms(&self) -> Option<(f64, f64)> {
        self.include_second_order
            .then(|| (self.coefficients[C1], self.coefficients[C2]))
    }

    /// `(h1, h2)`, the `cos η/2` and `sin η/2` coefficients.
    pub fn half_order_terms(&self) -> Option<(f64, f64)> {
        self.include_second_order
            .then(|| (self.coefficients[H1], self.coefficients[H2]))
    }

    /// Wald statistic `cᵀ Σ⁻¹ c` for `(c1, c2)` against zero.
    pub fn second_order_chi2(&self) -> Option<f64> {
        let (c1, c2) = self.second_order_terms()?;
        let s = &self.covariance;
        let (a, b, d) = (s[(C1, C1)], s[(C1, C2)], s[(C2, C2)]);
        let det = a * d - b * b;
        if !(det > 0.0) {
            return Some(if c1 == 0.0 && c2 == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Some((d * c1 * c1 - 2.0 * b * c1 * c2 + a * c2 * c2) / det)
    }

    /// Gaussian-equivalent significance of a nonzero `(c1, c2)`: the `z` whose
    /// two-sided tail equals the χ²(2) p-value `exp(−χ²/2)`.
    pub fn second_order_significance(&self) -> Option<f64> {
        let chi2 = self.second_order_chi2()?;
        Some(chi2_2dof_to_sigma(chi2))
    }

    pub fn evaluate(&self, eta: f64) -> f64 {
        basis(eta, self.include_second_order)
            .iter()
            .zip(&self.coefficients)
            .map(|(b, c)| b * c)
            .sum()
    }
}

/// Converts a two-degree-of-freedom χ² into a two-sided Gaussian `z`.
pub fn chi2_2dof_to_sigma(chi2: f64) -> f64 {
    let half = 0.5 * chi2;
    if !half.is_finite() {
        return f64::INFINITY;
    }
    let p = (-half).exp();
    if p >= 1.0 {
        return 0.0;
    }
    if p < 1e-300 {
        // Tail asymptotics: p ≈ √(2/π) e^{−z²/2}/z.
        return (2.0 * half).sqrt();
    }
    std::f64::consts::SQRT_2 * erfc_inv(p)
}

/// Minimum η span for a fit.
pub fn required_span(include_second_order: bool) -> f64 {
    if include_second_order {
        2.0 * TAU
    } else {
        PI
    }
}

/// Fits the harmonic model. Points are weighted by `1/σ²` unless any `σ` is
/// zero, in which case the fit is unweighted and its covariance is scaled
/// by the residual variance.
pub fn fit_harmonic(scan: &IntensityScan, include_second_order: bool) -> Result<FitResult, AnalysisError> {
    let n = scan.samples.len();
    let params = if include_second_order { 7 } else { 3 };
    let needed = params + 3;
    if n < needed {
        return Err(AnalysisError::TooFewPoints { got: n, needed });
    }
    let (lo, hi) = scan
        .eta()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e), hi.max(e)));
    let span = hi - lo;
    let required = required_span(include_second_order);
    if span < required * (1.0 - 1e-9) {
        return Err(AnalysisError::InsufficientSpan { span, required });
    }

    let weighted = scan.samples.iter().all(|s| s.sigma > 0.0 && s.sigma.is_finite());
    let mut x = DMatrix::<f64>::zeros(n, params);
    let mut y = DVector::<f64>::zeros(n);
    for (i, s) in scan.samples.iter().enumerate() {
        let inv = if weighted { 1.0 / s.sigma } else { 1.0 };
        for (j, b) in basis(s.eta, include_second_order).into_iter().enumerate() {
            x[(i, j)] = b * inv;
        }
        y[i] = s.value * inv;
    }

    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let s_max = sv.max();
    let s_min = sv.min();
    if !(s_max > 0.0) || s_min / s_max < RANK_TOL {
        return Err(AnalysisError::RankDeficient {
            condition: if s_max > 0.0 { s_min / s_max } else { 0.0 },
        });
    }
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let uty = u.transpose() * &y;
    let mut scaled = DVector::<f64>::zeros(params);
    let mut inv_s2 = DMatrix::<f64>::zeros(params, params);
    for k in 0..params {
        scaled[k] = uty[k] / sv[k];
        inv_s2[(k, k)] = 1.0 / (sv[k] * sv[k]);
    }
    let coef = v_t.transpose() * scaled;
    let mut cov = v_t.transpose() * inv_s2 * v_t;

    let resid = &y - &x * &coef;
    let rss = resid.norm_squared();
    let dof = n - params;
    let chi2_reduced = rss / dof as f64;
    if !weighted {
        cov *= chi2_reduced;
    }
    // symmetrize against rounding
    let cov = (&cov + cov.transpose()) * 0.5;

    let coefficients: Vec<f64> = coef.iter().copied().collect();
    let extrema = extrema_from(&coefficients, &cov);
    Ok(FitResult {
        coefficients,
        covariance: cov,
        include_second_order,
        extrema,
        chi2_reduced,
        dof,
        weighted,
    })
}

fn extrema_from(c: &[f64], cov: &DMatrix<f64>) -> ExtremaEstimate {
    let (a0, b1, b2) = (c[A0], c[B1], c[B2]);
    let r1 = b1.hypot(b2);
    let (u1, u2) = if r1 > 0.0 { (b1 / r1, b2 / r1) } else { (0.0, 0.0) };
    // ∇I_min = (1, −u1, −u2), ∇I_max = (1, u1, u2) on (a0, b1, b2).
    let g_min = [1.0, -u1, -u2];
    let g_max = [1.0, u1, u2];
    let idx = [A0, B1, B2];
    let quad = |g: &[f64; 3], h: &[f64; 3]| {
        let mut acc = 0.0;
        for (i, gi) in idx.iter().zip(g) {
            for (j, hj) in idx.iter().zip(h) {
                acc += gi * cov[(*i, *j)] * hj;
            }
        }
        acc
    };
    ExtremaEstimate {
        min: a0 - r1,
        max: a0 + r1,
        var_min: quad(&g_min, &g_min).max(0.0),
        var_max: quad(&g_max, &g_max).max(0.0),
        cov: quad(&g_min, &g_max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mixing::Sample;

    fn synthetic(coef: &[f64], points: usize, span: f64, sigma: f64) -> IntensityScan {
        let second = coef.len() == 7;
        IntensityScan {
            samples: (0..points)
                .map(|k| {
                    let eta = span * k as f64 / (points - 1) as f64;
                    let value = basis(eta, second).iter().zip(coef).map(|(b, c)| b * c).sum();
                    Sample { eta, value, sigma }
                })
                .collect(),
            live_time_s: 1.0,
        }
    }

    #[test]
    fn recovers_generating_coefficients() {
        let coef = [0.5, -0.2, 0.13, 0.01, -0.02, 0.03, 0.004];
        for sigma in [0.0, 0.01] {
            let fit = fit_harmonic(&synthetic(&coef, 41, 8.0 * PI, sigma), true).unwrap();
            for (a, b) in fit.coefficients.iter().zip(coef) {
                assert!((a - b).abs() < 1e-10);
            }
            assert_eq!(fit.weighted, sigma > 0.0);
        }
        let fit = fit_harmonic(&synthetic(&coef[..3], 12, 1.2 * PI, 0.0), false).unwrap();
        assert!((fit.first_order_amplitude() - 0.2_f64.hypot(0.13)).abs() < 1e-10);
        assert!((fit.extrema.min - (0.5 - 0.2_f64.hypot(0.13))).abs() < 1e-10);
    }

    #[test]
    fn weighted_covariance_matches_formula() {
        // Unit weights and σ = 1 give (XᵀX)⁻¹; for the first-order basis on
        // a uniform grid over whole periods XᵀX is diag(N, N/2, N/2).
        let n = 40;
        let scan = IntensityScan {
            samples: (0..n)
                .map(|k| Sample {
                    eta: 2.0 * PI * k as f64 / n as f64,
                    value: 0.3,
                    sigma: 1.0,
                })
                .collect(),
            live_time_s: 1.0,
        };
        let fit = fit_harmonic(&scan, false).unwrap();
        assert!((fit.covariance[(0, 0)] - 1.0 / n as f64).abs() < 1e-14);
        assert!((fit.covariance[(1, 1)] - 2.0 / n as f64).abs() < 1e-14);
        assert!(fit.covariance[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn rank_and_span_errors() {
        // η ≡ 0 (mod π): cos 2η ≡ 1, sin 2η ≡ 0.
        let scan = IntensityScan {
            samples: (0..8)
                .map(|k| Sample {
                    eta: PI * k as f64,
                    value: 0.5,
                    sigma: 0.1,
                })
                .collect(),
            live_time_s: 1.0,
        };
        assert!(matches!(
            fit_harmonic(&scan, false),
            Err(AnalysisError::RankDeficient { .. })
        ));

        let short = synthetic(&[0.5, 0.1, 0.1], 20, 0.8 * PI, 0.1);
        assert!(matches!(
            fit_harmonic(&short, false),
            Err(AnalysisError::InsufficientSpan { .. })
        ));
        let mid = synthetic(&[0.5, 0.1, 0.1], 20, 3.0 * PI, 0.1);
        assert!(fit_harmonic(&mid, false).is_ok());
        assert!(matches!(
            fit_harmonic(&mid, true),
            Err(AnalysisError::InsufficientSpan { .. })
        ));
        let few = synthetic(&[0.5, 0.1, 0.1], 5, 3.0 * PI, 0.1);
        assert!(matches!(
            fit_harmonic(&few, false),
            Err(AnalysisError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn constant_scan_has_no_modulation() {
        let fit = fit_harmonic(&synthetic(&[0.5, 0.0, 0.0], 41, 8.0 * PI, 0.0), true).unwrap();
        assert!(fit.first_order_amplitude() < 1e-12);
        assert!((fit.extrema.min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sigma_conversion() {
        // χ²(2) quantiles for two-sided 2σ and 5σ tails.
        assert!((chi2_2dof_to_sigma(6.180_074_306) - 2.0).abs() < 1e-6);
        assert!((chi2_2dof_to_sigma(28.743_702_9) - 5.0).abs() < 1e-5);
        assert_eq!(chi2_2dof_to_sigma(0.0), 0.0);
        assert!(chi2_2dof_to_sigma(2000.0) > 40.0);
    }
}
