//! Forward model of the polarimeter: an ordered chain of spin rotations
//! acting on a partially polarized beam, read out behind a `+z` analyzer.
//!
//! The chain, in beam order, is
//!
//! 1. optional π flip about `x`,
//! 2. π/2 turner about `+x`,
//! 3. guide-field precession through `η + π/2`,
//! 4. the SU(2) coil,
//! 5. guide-field precession through `2nπ − (η + π/2)`,
//! 6. π/2 turner about `−x`,
//! 7. projection onto `|+z⟩`.
//!
//! Neutrons have a negative gyromagnetic ratio, so precession in a field
//! along `+z` turns the polarization about `−z`. The quarter-turn added to
//! `η` puts the scan origin where the closed-form intensity
//! `cos²ξ cos²δ + sin²ξ sin²(ζ + η)` has its argument; with this pair of
//! conventions [`propagate`] reproduces it exactly.
//!
//! Second-order (`λ/2`) neutrons fly twice as fast, so every field-induced
//! rotation angle in the chain is halved, including the coil's.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use thiserror::Error;

use crate::constants::{larmor_frequency, neutron_velocity, CM_TO_METRE};
use crate::spin::{AxisAngle, BlochState, Operator2, SpinError, Su2Params};

/// Guide-field strength of the reference setup [G].
pub const DEFAULT_GUIDE_FIELD_GAUSS: f64 = 5.893;
/// Mean wavelength of the reference setup [Å].
pub const DEFAULT_WAVELENGTH_ANGSTROM: f64 = 1.99;
/// Number of full precession turns over the guide; `4 L₀ ≈ 46 cm`.
pub const DEFAULT_N_WIND: u32 = 4;
/// Upper bound on the λ/2 intensity fraction measured by time of flight.
pub const DEFAULT_CONTAMINATION_EPS: f64 = 0.072;
/// Relative guide-field inhomogeneity bound.
pub const DEFAULT_INHOMOGENEITY_BETA_MAX: f64 = 0.004;
/// Length of a π/2 turner coil along the beam [cm].
pub const DEFAULT_TURNER_LENGTH_CM: f64 = 1.0;
/// Allowed relative mismatch between a given guide length and `nπħv/|μB|`.
pub const GUIDE_LENGTH_REL_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeamlineError {
    #[error("{name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("guide length {given_cm} cm is inconsistent with n = {n_wind} full turns ({expected_cm:.4} cm)")]
    GuideLengthMismatch {
        given_cm: f64,
        expected_cm: f64,
        n_wind: u32,
    },
    #[error("coil axis must lie in the xz-plane (axis y-component {0})")]
    CoilAxisNotInXzPlane(f64),
    #[error("scan positions must be strictly monotone (violated at index {0})")]
    NonMonotoneScan(usize),
    #[error("scan plan is empty")]
    EmptyScan,
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// The SU(2) coil transformation, in either description.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoilSpec {
    Params(Su2Params),
    /// Rotation about a field axis in the xz-plane.
    AxisAngle(AxisAngle),
}

impl CoilSpec {
    pub fn matrix(&self) -> Operator2 {
        match self {
            CoilSpec::Params(p) => p.to_matrix(),
            CoilSpec::AxisAngle(aa) => aa.to_matrix(),
        }
    }

    /// Axis-angle form; for [`CoilSpec::Params`] this is the principal
    /// logarithm of the matrix.
    pub fn axis_angle(&self) -> AxisAngle {
        match self {
            CoilSpec::Params(p) => AxisAngle::from_matrix(&p.to_matrix()).expect("U₀ is special unitary"),
            CoilSpec::AxisAngle(aa) => *aa,
        }
    }

    /// Canonical `(ξ, δ, ζ)`.
    pub fn params(&self) -> Su2Params {
        match self {
            CoilSpec::Params(p) => *p,
            CoilSpec::AxisAngle(aa) => {
                Su2Params::from_matrix(&aa.to_matrix())
                    .expect("axis-angle matrix is special unitary")
                    .params
            }
        }
    }
}

/// Full description of the physical setup.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamlineConfig {
    /// Incident polarization degree along `+z`.
    pub r0: f64,
    /// π flipper in front of the first turner.
    pub flipper: bool,
    pub coil: CoilSpec,
    pub guide_field_gauss: f64,
    /// Total guide distance `L₀ = L + L′` [cm].
    pub guide_length_cm: f64,
    /// Total guide precession is `2nπ`.
    pub n_wind: u32,
    pub wavelength_angstrom: f64,
    /// Fraction of the detected intensity carried by λ/2 neutrons.
    pub contamination_eps: f64,
    /// Realized relative guide-field error; scales every `η` by `1 + β`.
    pub inhomogeneity_beta: f64,
    /// Model the π/2 turners as rotations about an axis tilted by `B_z`.
    pub turners_in_field: bool,
    pub turner_length_cm: f64,
}

impl BeamlineConfig {
    /// Reference setup (field, wavelength, `n = 4`) with the guide length
    /// derived from `n`, λ/2 contamination at its default bound and no
    /// other imperfections.
    pub fn new(r0: f64, coil: CoilSpec) -> Self {
        let mut cfg = Self {
            r0,
            flipper: false,
            coil,
            guide_field_gauss: DEFAULT_GUIDE_FIELD_GAUSS,
            guide_length_cm: 0.0,
            n_wind: DEFAULT_N_WIND,
            wavelength_angstrom: DEFAULT_WAVELENGTH_ANGSTROM,
            contamination_eps: DEFAULT_CONTAMINATION_EPS,
            inhomogeneity_beta: 0.0,
            turners_in_field: false,
            turner_length_cm: DEFAULT_TURNER_LENGTH_CM,
        };
        cfg.guide_length_cm = cfg.nominal_guide_length_cm();
        cfg
    }

    /// Reference setup with every imperfection switched off.
    pub fn ideal(r0: f64, coil: CoilSpec) -> Self {
        Self::new(r0, coil).with_eps(0.0)
    }

    pub fn with_flipper(mut self, on: bool) -> Self {
        self.flipper = on;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.contamination_eps = eps;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.inhomogeneity_beta = beta;
        self
    }

    pub fn with_turners_in_field(mut self, on: bool) -> Self {
        self.turners_in_field = on;
        self
    }

    /// Sets `n` and re-derives the guide length from it.
    pub fn with_n_wind(mut self, n: u32) -> Self {
        self.n_wind = n;
        self.guide_length_cm = self.nominal_guide_length_cm();
        self
    }

    pub fn velocity(&self) -> f64 {
        neutron_velocity(self.wavelength_angstrom)
    }

    /// Guide-field Larmor frequency `ω = 2|μ|B_z/ħ` [rad/s].
    pub fn larmor_frequency(&self) -> f64 {
        larmor_frequency(self.guide_field_gauss)
    }

    /// Precession angle per metre of flight in the guide field.
    pub fn precession_per_metre(&self) -> f64 {
        self.larmor_frequency() / self.velocity()
    }

    /// `nπħv/|μB_z|` in cm.
    pub fn nominal_guide_length_cm(&self) -> f64 {
        TAU * self.n_wind as f64 / self.precession_per_metre() / CM_TO_METRE
    }

    pub fn validate(&self) -> Result<(), BeamlineError> {
        fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), BeamlineError> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(BeamlineError::InvalidParameter { name, value, reason })
            }
        }
        check("r0", self.r0, (0.0..=1.0).contains(&self.r0), "must lie in [0, 1]")?;
        check(
            "contamination_eps",
            self.contamination_eps,
            (0.0..=1.0).contains(&self.contamination_eps),
            "must lie in [0, 1]",
        )?;
        check(
            "guide_field_gauss",
            self.guide_field_gauss,
            self.guide_field_gauss > 0.0,
            "must be positive",
        )?;
        check(
            "wavelength_angstrom",
            self.wavelength_angstrom,
            self.wavelength_angstrom > 0.0,
            "must be positive",
        )?;
        check(
            "inhomogeneity_beta",
            self.inhomogeneity_beta,
            self.inhomogeneity_beta.abs() < 1.0,
            "must satisfy |β| < 1",
        )?;
        check(
            "turner_length_cm",
            self.turner_length_cm,
            self.turner_length_cm > 0.0,
            "must be positive",
        )?;
        if self.n_wind == 0 {
            return Err(BeamlineError::InvalidParameter {
                name: "n_wind",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let expected = self.nominal_guide_length_cm();
        if !((self.guide_length_cm - expected).abs() <= GUIDE_LENGTH_REL_TOL * expected) {
            return Err(BeamlineError::GuideLengthMismatch {
                given_cm: self.guide_length_cm,
                expected_cm: expected,
                n_wind: self.n_wind,
            });
        }
        if let CoilSpec::AxisAngle(aa) = &self.coil {
            let ny = aa.axis()[1];
            if ny.abs() > 1e-9 {
                return Err(BeamlineError::CoilAxisNotInXzPlane(ny));
            }
        }
        Ok(())
    }
}

/// Which neutron population traverses the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// Nominal wavelength λ.
    First,
    /// Contamination at λ/2; all rotation angles halved.
    Second,
}

impl Order {
    fn angle_scale(self) -> f64 {
        match self {
            Order::First => 1.0,
            Order::Second => 0.5,
        }
    }
}

/// η-independent pieces of the chain for one neutron order.
#[derive(Clone, Copy, Debug)]
struct Chain {
    scale: f64,
    flipper: Operator2,
    turner_in: Operator2,
    coil: Operator2,
    turner_out: Operator2,
}

const MINUS_Z: [f64; 3] = [0.0, 0.0, -1.0];

impl Chain {
    fn build(cfg: &BeamlineConfig, order: Order) -> Self {
        let f = order.angle_scale();
        // Guide precession accumulated while crossing one turner.
        let tilt = if cfg.turners_in_field {
            cfg.precession_per_metre() * cfg.turner_length_cm * CM_TO_METRE
        } else {
            0.0
        };
        let turner = |sign: f64| AxisAngle::from_rotation_vector([f * sign * FRAC_PI_2, 0.0, -f * tilt]).to_matrix();
        Self {
            scale: f,
            flipper: AxisAngle::about(AxisAngle::X, f * PI).to_matrix(),
            turner_in: turner(1.0),
            coil: cfg.coil.axis_angle().scaled(f).to_matrix(),
            turner_out: turner(-1.0),
        }
    }

    fn operator(&self, n_wind: u32, flipper: bool, eta: f64) -> Operator2 {
        let first = eta + FRAC_PI_2;
        let second = TAU * n_wind as f64 - first;
        let p1 = AxisAngle::about(MINUS_Z, self.scale * first).to_matrix();
        let p2 = AxisAngle::about(MINUS_Z, self.scale * second).to_matrix();
        let u = self.turner_out * p2 * self.coil * p1 * self.turner_in;
        if flipper {
            u * self.flipper
        } else {
            u
        }
    }
}

/// A validated configuration with its η-independent operators precomputed.
#[derive(Clone, Debug)]
pub struct Beamline {
    cfg: BeamlineConfig,
    incident: BlochState,
    first: Chain,
    second: Chain,
}

impl Beamline {
    pub fn new(cfg: BeamlineConfig) -> Result<Self, BeamlineError> {
        cfg.validate()?;
        Ok(Self {
            incident: BlochState::polarized_z(cfg.r0)?,
            first: Chain::build(&cfg, Order::First),
            second: Chain::build(&cfg, Order::Second),
            cfg,
        })
    }

    pub fn config(&self) -> &BeamlineConfig {
        &self.cfg
    }

    /// Full chain operator at precession angle `eta`.
    pub fn operator(&self, order: Order, flipper: bool, eta: f64) -> Operator2 {
        let chain = match order {
            Order::First => &self.first,
            Order::Second => &self.second,
        };
        chain.operator(self.cfg.n_wind, flipper, eta)
    }

    /// Noiseless detection probability for one order, without
    /// contamination mixing or inhomogeneity.
    pub fn detection_probability(&self, order: Order, flipper: bool, eta: f64) -> f64 {
        let u = self.operator(order, flipper, eta);
        self.incident.apply(&u).population_up().clamp(0.0, 1.0)
    }

    /// Contamination-weighted probability at the inhomogeneity-scaled angle.
    pub fn observed(&self, flipper: bool, eta: f64) -> f64 {
        let eta_eff = eta * (1.0 + self.cfg.inhomogeneity_beta);
        let eps = self.cfg.contamination_eps;
        let first = self.detection_probability(Order::First, flipper, eta_eff);
        if eps == 0.0 {
            return first;
        }
        let second = self.detection_probability(Order::Second, flipper, eta_eff);
        ((1.0 - eps) * first + eps * second).clamp(0.0, 1.0)
    }

    /// η-average of the second-order probability. Its harmonics sit at
    /// `η/2` and `η`, so sixteen samples over one 4π period are exact.
    pub fn second_order_mean(&self, flipper: bool) -> f64 {
        const SAMPLES: usize = 16;
        (0..SAMPLES)
            .map(|k| {
                let eta = 2.0 * TAU * k as f64 / SAMPLES as f64;
                self.detection_probability(Order::Second, flipper, eta)
            })
            .sum::<f64>()
            / SAMPLES as f64
    }
}

/// Ordered precession angles of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPlan {
    eta: Vec<f64>,
}

/// Number of points in the default scan.
pub const DEFAULT_SCAN_POINTS: usize = 41;

impl ScanPlan {
    pub fn new(eta: Vec<f64>) -> Result<Self, BeamlineError> {
        if eta.is_empty() {
            return Err(BeamlineError::EmptyScan);
        }
        let increasing = eta.len() < 2 || eta[1] > eta[0];
        for (i, w) in eta.windows(2).enumerate() {
            let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
            if !ok || !w[1].is_finite() {
                return Err(BeamlineError::NonMonotoneScan(i + 1));
            }
        }
        Ok(Self { eta })
    }

    /// `points` equally spaced angles from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, points: usize) -> Result<Self, BeamlineError> {
        match points {
            0 => Err(BeamlineError::EmptyScan),
            1 => Self::new(vec![start]),
            _ => {
                let step = (end - start) / (points - 1) as f64;
                Self::new((0..points).map(|k| start + step * k as f64).collect())
            }
        }
    }

    /// Turner displacements [mm] converted through `Δη = ωΔx/v`.
    pub fn from_positions_mm(positions_mm: &[f64], cfg: &BeamlineConfig) -> Result<Self, BeamlineError> {
        let k = cfg.precession_per_metre() * 1e-3;
        Self::new(positions_mm.iter().map(|x| x * k).collect())
    }

    /// Default plan: 41 points over the full guide length `L₀`, i.e.
    /// `η ∈ [0, 2nπ]`.
    pub fn default_for(cfg: &BeamlineConfig) -> Self {
        Self::uniform(0.0, TAU * cfg.n_wind as f64, DEFAULT_SCAN_POINTS).expect("fixed plan is valid")
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn span(&self) -> f64 {
        (self.eta[self.eta.len() - 1] - self.eta[0]).abs()
    }

    pub fn positions_mm(&self, cfg: &BeamlineConfig) -> Vec<f64> {
        let k = 1e3 / cfg.precession_per_metre();
        self.eta.iter().map(|e| e * k).collect()
    }
}

/// Intensity extrema of a scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub max: f64,
}

/// `cos²ξ cos²δ + sin²ξ sin²(ζ + η)`.
pub fn pure_intensity(p: &Su2Params, eta: f64) -> f64 {
    let (sx, cx) = p.xi.sin_cos();
    let cd = p.delta.cos();
    let se = (p.zeta + eta).sin();
    cx * cx * cd * cd + sx * sx * se * se
}

/// `(1 − r)/2 + r·I(η)` for polarization degree `r`.
pub fn mixed_intensity(r: f64, p: &Su2Params, eta: f64) -> f64 {
    (1.0 - r) / 2.0 + r * pure_intensity(p, eta)
}

/// Closed-form extrema of [`mixed_intensity`] over `η`.
pub fn analytic_extrema(r: f64, p: &Su2Params) -> Extrema {
    let (sx, cx) = p.xi.sin_cos();
    let cd = p.delta.cos();
    let min = (1.0 - r) / 2.0 + r * cx * cx * cd * cd;
    Extrema {
        min,
        max: min + r * sx * sx,
    }
}

/// First-order detection probability for `cfg` (flipper as configured).
pub fn propagate(cfg: &BeamlineConfig, eta: f64) -> Result<f64, BeamlineError> {
    let b = Beamline::new(cfg.clone())?;
    Ok(b.detection_probability(Order::First, cfg.flipper, eta))
}

/// Detection probability of the λ/2 population.
pub fn propagate_second_order(cfg: &BeamlineConfig, eta: f64) -> Result<f64, BeamlineError> {
    let b = Beamline::new(cfg.clone())?;
    Ok(b.detection_probability(Order::Second, cfg.flipper, eta))
}

/// `(1 − ε)·first + ε·second` at `η(1 + β)`.
pub fn observed_intensity(cfg: &BeamlineConfig, eta: f64) -> Result<f64, BeamlineError> {
    let b = Beamline::new(cfg.clone())?;
    Ok(b.observed(cfg.flipper, eta))
}
