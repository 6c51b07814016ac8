//! Phase from the extrema of an intensity scan.

use std::f64::consts::FRAC_PI_2;

use crate::spin::Su2Params;

use super::fit::ExtremaEstimate;
use super::AnalysisError;

/// A radicand outside `[0, 1]` by more than this many standard errors is
/// rejected; closer excursions are clipped to the boundary.
pub const CLIP_SIGMAS: f64 = 3.0;

/// Absolute slack on the radicand range for noise-free inputs.
pub const RADICAND_ABS_TOL: f64 = 1e-12;

/// Smallest accepted radicand denominator.
pub const DENOMINATOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMethod {
    Pure,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseFlag {
    /// The radicand was clipped into `[0, 1]`.
    Clipped,
    /// No usable modulation, or `r = 0`; the phase carries no information.
    Indeterminate,
    /// The theory value sits on the `cos θ = 0` branch point.
    SingularTheory,
    /// No theory value: `cos ξ = 0` or invalid parameters.
    NoTheory,
    /// `sigma_phi` comes from the bootstrap spread.
    BootstrapSigma,
    /// The second-order terms were significant at more than 2σ.
    SecondOrderDetected,
}

impl PhaseFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseFlag::Clipped => "clipped",
            PhaseFlag::Indeterminate => "indeterminate",
            PhaseFlag::SingularTheory => "singular_theory",
            PhaseFlag::NoTheory => "no_theory",
            PhaseFlag::BootstrapSigma => "bootstrap_sigma",
            PhaseFlag::SecondOrderDetected => "second_order_detected",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseResult {
    /// Extracted phase in `[0, π/2]`.
    pub phi: f64,
    pub sigma_phi: f64,
    /// Systematic error from the guide-field inhomogeneity band.
    pub sigma_syst: f64,
    pub r: f64,
    /// `|Φ_theory|`, when defined.
    pub phi_theory: Option<f64>,
    pub method: PhaseMethod,
    pub flags: Vec<PhaseFlag>,
}

impl PhaseResult {
    pub fn has(&self, flag: PhaseFlag) -> bool {
        self.flags.contains(&flag)
    }

    pub(crate) fn flag(&mut self, flag: PhaseFlag) {
        if !self.has(flag) {
            self.flags.push(flag);
            self.flags.sort();
        }
    }

    /// Total error, statistical and systematic in quadrature.
    pub fn sigma_total(&self) -> f64 {
        self.sigma_phi.hypot(self.sigma_syst)
    }
}

/// Extrema measured from their physical bounds:
/// `excess = I_min − (1 − r)/2` and `deficit = (1 + r)/2 − I_max`.
///
/// Both can be far smaller than the extrema themselves; carrying them
/// directly keeps the phase formula free of cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremaOffsets {
    pub excess: f64,
    pub deficit: f64,
}

impl ExtremaOffsets {
    pub fn from_extrema(min: f64, max: f64, r: f64) -> Self {
        Self {
            excess: min - (1.0 - r) / 2.0,
            deficit: (1.0 + r) / 2.0 - max,
        }
    }

    /// Closed-form offsets of the mixed intensity for `U₀(p)`:
    /// `r cos²ξ cos²δ` and `r cos²ξ sin²δ`.
    pub fn analytic(r: f64, p: &Su2Params) -> Self {
        let c2 = p.xi.cos().powi(2);
        Self {
            excess: r * c2 * p.delta.cos().powi(2),
            deficit: r * c2 * p.delta.sin().powi(2),
        }
    }
}

/// Mixed-state phase evaluated on offsets rather than absolute extrema.
pub fn phase_from_offsets(o: &ExtremaOffsets, r: f64) -> Result<PhaseResult, AnalysisError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(AnalysisError::PolarizationOutOfRange(r));
    }
    let e = ExtremaEstimate::exact((1.0 - r) / 2.0 + o.excess, (1.0 + r) / 2.0 - o.deficit);
    extract(&e, o, r, PhaseMethod::Mixed)
}

/// `φ = arccos √(I_min/(1 − I_max + I_min))` for a fully polarized beam.
pub fn phase_from_extrema_pure(e: &ExtremaEstimate) -> Result<PhaseResult, AnalysisError> {
    extract(
        e,
        &ExtremaOffsets::from_extrema(e.min, e.max, 1.0),
        1.0,
        PhaseMethod::Pure,
    )
}

/// `Φ = arccos √((I_min − (1−r)/2) / (r²[(1+r)/2 − I_max] + I_min − (1−r)/2))`.
///
/// At `r = 1` this is the pure-state expression term for term.
pub fn phase_from_extrema_mixed(e: &ExtremaEstimate, r: f64) -> Result<PhaseResult, AnalysisError> {
    if !(0.0..=1.0).contains(&r) {
        return Err(AnalysisError::PolarizationOutOfRange(r));
    }
    extract(e, &ExtremaOffsets::from_extrema(e.min, e.max, r), r, PhaseMethod::Mixed)
}

struct Radicand {
    num: f64,
    /// `den − num`
    gap: f64,
    den: f64,
    x: f64,
    /// `∂x/∂(I_min, I_max)`
    grad: [f64; 2],
}

fn radicand(o: &ExtremaOffsets, r: f64) -> Radicand {
    let num = o.excess;
    let gap = r * r * o.deficit;
    let den = gap + num;
    let d2 = den * den;
    Radicand {
        num,
        gap,
        den,
        x: num / den,
        grad: [gap / d2, num * r * r / d2],
    }
}

fn phase_of(x: f64) -> f64 {
    x.sqrt().acos()
}

fn extract(e: &ExtremaEstimate, o: &ExtremaOffsets, r: f64, method: PhaseMethod) -> Result<PhaseResult, AnalysisError> {
    let mut out = PhaseResult {
        phi: 0.0,
        sigma_phi: FRAC_PI_2,
        sigma_syst: 0.0,
        r,
        phi_theory: None,
        method,
        flags: Vec::new(),
    };
    let modulation = e.max - e.min;
    let sigma_mod = (e.var_min + e.var_max - 2.0 * e.cov).max(0.0).sqrt();
    if r == 0.0 {
        out.flag(PhaseFlag::Indeterminate);
        return Ok(out);
    }

    let Radicand {
        num,
        gap,
        den,
        x,
        grad: g,
    } = radicand(o, r);
    if !(den.abs() > DENOMINATOR_TOL) || !x.is_finite() {
        return Err(AnalysisError::DegenerateDenominator { denominator: den });
    }
    let var_x = g[0] * g[0] * e.var_min + 2.0 * g[0] * g[1] * e.cov + g[1] * g[1] * e.var_max;
    let sigma_x = var_x.max(0.0).sqrt();
    let excess = if x < 0.0 { -x } else { x - 1.0 };
    if excess > CLIP_SIGMAS * sigma_x + RADICAND_ABS_TOL {
        return Err(AnalysisError::OutOfPhysicalRange {
            radicand: x,
            sigma: sigma_x,
        });
    }

    let xc = x.clamp(0.0, 1.0);
    if xc != x && excess > RADICAND_ABS_TOL {
        out.flag(PhaseFlag::Clipped);
    }
    out.phi = if xc == x {
        // arccos √(n/d) = atan2(√(d − n), √n) without forming 1 − x.
        let s = den.signum();
        (s * gap).max(0.0).sqrt().atan2((s * num).max(0.0).sqrt())
    } else {
        phase_of(xc)
    };
    // dΦ/dx diverges at both ends; use the one-sided interval there.
    let interior = xc > 0.0 && xc < 1.0 && sigma_x < xc.min(1.0 - xc);
    out.sigma_phi = if interior {
        sigma_x / (2.0 * (xc * (1.0 - xc)).sqrt())
    } else {
        let lo = phase_of((xc - sigma_x).clamp(0.0, 1.0));
        let hi = phase_of((xc + sigma_x).clamp(0.0, 1.0));
        (lo - out.phi).abs().max((hi - out.phi).abs())
    };
    if modulation <= RADICAND_ABS_TOL || modulation < 2.0 * sigma_mod {
        out.flag(PhaseFlag::Indeterminate);
    }
    Ok(out)
}
