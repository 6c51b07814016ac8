//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! xi_rad = 1.71
//! r_targets = 0.8, 0.6, 0.3
//! ```
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys carry their unit. Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use polariphase::analysis::{FitMode, PipelineOptions, Weighting, DEFAULT_BOOTSTRAP_REPLICAS};
use polariphase::beamline::{BeamlineError, DEFAULT_INHOMOGENEITY_BETA_MAX, DEFAULT_SCAN_POINTS};
use polariphase::counting::DEFAULT_COUNTS_SCALE;
use polariphase::{AxisAngle, BeamlineConfig, CoilSpec, CountingPlan, ScanPlan, Su2Params};

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("xi_rad", "coil parameter ξ"),
    ("delta_rad", "coil parameter δ"),
    ("zeta_rad", "coil parameter ζ"),
    ("coil_axis", "coil rotation axis x, y, z (instead of ξ, δ, ζ)"),
    ("coil_angle_rad", "coil rotation angle, with coil_axis"),
    ("r0", "incident polarization"),
    ("flipper", "π flipper state for single-channel tools"),
    ("guide_field_gauss", "guide field B_z"),
    (
        "guide_length_cm",
        "total guide length L0; derived from n_wind when absent",
    ),
    ("n_wind", "number of full precessions over L0"),
    ("wavelength_angstrom", "first-order wavelength"),
    ("contamination_eps", "λ/2 intensity fraction"),
    ("inhomogeneity_beta_max", "half-width of the guide-field scale error"),
    (
        "inhomogeneity_beta",
        "fixed guide-field scale error instead of a seeded draw",
    ),
    ("turners_in_field", "turners sit inside the guide field"),
    ("turner_length_cm", "turner length along the beam"),
    ("counts_scale", "expected counts per point at unit probability"),
    ("background_counts", "expected background counts per point"),
    ("live_time_s", "counting time per point and channel"),
    ("seed", "master seed"),
    ("scan_points", "number of scan points"),
    ("scan_start_rad", "first precession angle"),
    ("scan_end_rad", "last precession angle; defaults to 2π·n_wind"),
    ("expectation", "write noise-free expected counts"),
    ("r_targets", "polarizations analyzed after r0"),
    ("fit_mode", "agnostic or corrected"),
    ("include_second_order", "fit the λ/2 harmonics"),
    ("weighting", "model or observed"),
    ("bootstrap_replicas", "bootstrap replicas; 0 disables"),
    (
        "systematic_beta",
        "η scale band for the systematic error; defaults to inhomogeneity_beta_max",
    ),
    ("scan_csv", "scan CSV path"),
    ("report_json", "report path"),
    ("reference_json", "reference table path"),
    ("compare_tol_rad", "tolerance for compare"),
];

pub const DEFAULT_COMPARE_TOL_RAD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io { path: PathBuf, message: String },
    Syntax { line: usize, text: String },
    UnknownKey { line: usize, key: String },
    DuplicateKey { line: usize, key: String },
    MissingKey(&'static str),
    InvalidValue { key: String, value: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => write!(f, "cannot read {}: {message}", path.display()),
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected `key = value`, got `{text}`"),
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key `{key}`"),
            ConfigError::DuplicateKey { line, key } => write!(f, "line {line}: key `{key}` given twice"),
            ConfigError::MissingKey(key) => write!(f, "missing required key `{key}`"),
            ConfigError::InvalidValue { key, value, reason } => {
                write!(f, "invalid value `{value}` for key `{key}`: {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Nominal apparatus; `inhomogeneity_beta` is zero here.
    pub beamline: BeamlineConfig,
    pub beta_max: f64,
    pub beta_fixed: Option<f64>,
    pub counting: CountingPlan,
    pub expectation: bool,
    pub analysis: PipelineOptions,
    pub scan_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub reference_json: Option<PathBuf>,
    pub compare_tol_rad: f64,
}

/// Raw assignments with their line numbers.
struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: body.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    text: body.to_string(),
                });
            }
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            if map.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| invalid(key, v, "expected a finite number"))
            })
            .transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| invalid(key, v, "expected a non-negative integer"))
            })
            .transpose()
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.raw(key)
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(invalid(key, v, "expected true or false")),
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.raw(key)
            .map(|v| parse_list(v).map_err(|r| invalid(key, v, r)))
            .transpose()
    }

    fn path(&self, key: &str, base: &Path) -> Option<PathBuf> {
        self.raw(key).map(|v| base.join(v))
    }
}

/// Comma-separated numbers.
pub fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("`{}` is not a number", s.trim()))
        })
        .collect()
}

pub fn parse_fit_mode(v: &str) -> Option<FitMode> {
    match v {
        "agnostic" => Some(FitMode::Agnostic),
        "corrected" => Some(FitMode::Corrected),
        _ => None,
    }
}

pub fn fit_mode_name(mode: FitMode) -> &'static str {
    match mode {
        FitMode::Agnostic => "agnostic",
        FitMode::Corrected => "corrected",
    }
}

fn beamline_key(err: &BeamlineError) -> &'static str {
    match err {
        BeamlineError::InvalidParameter { name, .. } => name,
        BeamlineError::GuideLengthMismatch { .. } => "guide_length_cm",
        BeamlineError::CoilAxisNotInXzPlane(_) => "coil_axis",
        BeamlineError::NonMonotoneScan(_) | BeamlineError::EmptyScan => "scan_points",
        BeamlineError::Spin(_) => "coil",
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses configuration text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let e = Entries::parse(text)?;

        let params = [e.f64("xi_rad")?, e.f64("delta_rad")?, e.f64("zeta_rad")?];
        let axis = e.list("coil_axis")?;
        let angle = e.f64("coil_angle_rad")?;
        let coil = match (params, axis, angle) {
            ([Some(xi), Some(delta), Some(zeta)], None, None) => CoilSpec::Params(Su2Params::new(xi, delta, zeta)),
            ([None, None, None], Some(axis), Some(angle)) => {
                let v = e.raw("coil_axis").unwrap_or_default();
                let axis: [f64; 3] = axis
                    .try_into()
                    .map_err(|_| invalid("coil_axis", v, "expected three components"))?;
                CoilSpec::AxisAngle(
                    AxisAngle::new(axis, angle).map_err(|err| invalid("coil_axis", v, err.to_string()))?,
                )
            }
            ([None, None, None], None, None) => return Err(ConfigError::MissingKey("xi_rad")),
            ([_, _, _], None, None) => {
                let missing = ["xi_rad", "delta_rad", "zeta_rad"]
                    .into_iter()
                    .zip(params)
                    .find(|(_, p)| p.is_none())
                    .map_or("xi_rad", |(k, _)| k);
                return Err(ConfigError::MissingKey(missing));
            }
            ([None, None, None], Some(_), None) => return Err(ConfigError::MissingKey("coil_angle_rad")),
            ([None, None, None], None, Some(_)) => return Err(ConfigError::MissingKey("coil_axis")),
            _ => {
                return Err(invalid(
                    "coil_axis",
                    e.raw("coil_axis").unwrap_or(""),
                    "give either xi_rad/delta_rad/zeta_rad or coil_axis/coil_angle_rad",
                ))
            }
        };

        let r0 = e.f64("r0")?.ok_or(ConfigError::MissingKey("r0"))?;
        let mut b = BeamlineConfig::new(r0, coil);
        if let Some(g) = e.f64("guide_field_gauss")? {
            b.guide_field_gauss = g;
        }
        if let Some(w) = e.f64("wavelength_angstrom")? {
            b.wavelength_angstrom = w;
        }
        if let Some(n) = e.u64("n_wind")? {
            let n = u32::try_from(n).map_err(|_| invalid("n_wind", &n.to_string(), "too large"))?;
            b.n_wind = n;
        }
        b.guide_length_cm = match e.f64("guide_length_cm")? {
            Some(l) => l,
            None => b.nominal_guide_length_cm(),
        };
        if let Some(f) = e.bool("flipper")? {
            b.flipper = f;
        }
        if let Some(eps) = e.f64("contamination_eps")? {
            b.contamination_eps = eps;
        }
        if let Some(t) = e.bool("turners_in_field")? {
            b.turners_in_field = t;
        }
        if let Some(l) = e.f64("turner_length_cm")? {
            b.turner_length_cm = l;
        }
        b.inhomogeneity_beta = 0.0;
        b.validate().map_err(|err| {
            let key = beamline_key(&err);
            invalid(key, e.raw(key).unwrap_or("(derived)"), err.to_string())
        })?;

        let beta_max = e
            .f64("inhomogeneity_beta_max")?
            .unwrap_or(DEFAULT_INHOMOGENEITY_BETA_MAX);
        if !(0.0..1.0).contains(&beta_max) {
            return Err(invalid(
                "inhomogeneity_beta_max",
                e.raw("inhomogeneity_beta_max").unwrap_or(""),
                "must lie in [0, 1)",
            ));
        }
        let beta_fixed = e.f64("inhomogeneity_beta")?;
        if let Some(beta) = beta_fixed {
            if beta.abs() >= 1.0 {
                return Err(invalid(
                    "inhomogeneity_beta",
                    e.raw("inhomogeneity_beta").unwrap_or(""),
                    "|β| must be below 1",
                ));
            }
        }

        let points = e.u64("scan_points")?.unwrap_or(DEFAULT_SCAN_POINTS as u64) as usize;
        let start = e.f64("scan_start_rad")?.unwrap_or(0.0);
        let end = e
            .f64("scan_end_rad")?
            .unwrap_or(std::f64::consts::TAU * b.n_wind as f64);
        let scan = ScanPlan::uniform(start, end, points)
            .map_err(|err| invalid("scan_points", &points.to_string(), err.to_string()))?;

        let mut counting = CountingPlan::new(scan, e.u64("seed")?.unwrap_or(0));
        counting.counts_scale = e.f64("counts_scale")?.unwrap_or(DEFAULT_COUNTS_SCALE);
        counting.background = e.f64("background_counts")?.unwrap_or(0.0);
        counting.live_time_s = e.f64("live_time_s")?.unwrap_or(1.0);
        counting.validate().map_err(|err| {
            let key = match err {
                polariphase::CountingError::InvalidScale(_) => "counts_scale",
                polariphase::CountingError::InvalidBackground(_) => "background_counts",
                _ => "live_time_s",
            };
            invalid(key, e.raw(key).unwrap_or(""), err.to_string())
        })?;

        let mut analysis = PipelineOptions {
            systematic_beta: beta_max,
            ..PipelineOptions::default()
        };
        if let Some(r) = e.list("r_targets")? {
            analysis.r_targets = r;
        }
        if let Some(v) = e.raw("fit_mode") {
            analysis.fit_mode =
                parse_fit_mode(v).ok_or_else(|| invalid("fit_mode", v, "expected agnostic or corrected"))?;
        }
        if let Some(s) = e.bool("include_second_order")? {
            analysis.include_second_order = s;
        }
        if let Some(v) = e.raw("weighting") {
            analysis.weighting = match v {
                "model" => Weighting::Model,
                "observed" => Weighting::Observed,
                _ => return Err(invalid("weighting", v, "expected model or observed")),
            };
        }
        if let Some(n) = e.u64("bootstrap_replicas")? {
            analysis.bootstrap_replicas = n as usize;
        }
        if let Some(s) = e.f64("systematic_beta")? {
            if !(0.0..1.0).contains(&s) {
                return Err(invalid(
                    "systematic_beta",
                    e.raw("systematic_beta").unwrap_or(""),
                    "must lie in [0, 1)",
                ));
            }
            analysis.systematic_beta = s;
        }

        let compare_tol_rad = e.f64("compare_tol_rad")?.unwrap_or(DEFAULT_COMPARE_TOL_RAD);
        if compare_tol_rad < 0.0 {
            return Err(invalid(
                "compare_tol_rad",
                e.raw("compare_tol_rad").unwrap_or(""),
                "must be non-negative",
            ));
        }

        Ok(Self {
            beamline: b,
            beta_max,
            beta_fixed,
            counting,
            expectation: e.bool("expectation")?.unwrap_or(false),
            analysis,
            scan_csv: e.path("scan_csv", base),
            report_json: e.path("report_json", base),
            reference_json: e.path("reference_json", base),
            compare_tol_rad,
        })
    }

    /// Guide-field scale error for the simulated scan: the fixed value if
    /// given, otherwise a draw from the seed. Noise-free runs use zero
    /// unless a fixed value is configured.
    pub fn realized_beta(&self) -> f64 {
        match self.beta_fixed {
            Some(b) => b,
            None if self.expectation => 0.0,
            None => polariphase::counting::draw_inhomogeneity(self.counting.seed, self.beta_max),
        }
    }

    /// Apparatus as simulated.
    pub fn simulated_beamline(&self) -> BeamlineConfig {
        self.beamline.clone().with_beta(self.realized_beta())
    }
}

/// Command-line overrides shared by the subcommands.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub r_targets: Option<Vec<f64>>,
    pub fit_mode: Option<FitMode>,
    pub bootstrap: Option<usize>,
    pub expectation: bool,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(seed) = o.seed {
            self.counting.seed = seed;
        }
        if let Some(eps) = o.eps {
            self.beamline.contamination_eps = eps;
            self.beamline
                .validate()
                .map_err(|err| invalid("contamination_eps", &eps.to_string(), err.to_string()))?;
        }
        if let Some(r) = &o.r_targets {
            self.analysis.r_targets = r.clone();
        }
        if let Some(m) = o.fit_mode {
            self.analysis.fit_mode = m;
        }
        if let Some(n) = o.bootstrap {
            self.analysis.bootstrap_replicas = n;
        }
        if o.expectation {
            self.expectation = true;
        }
        Ok(())
    }

    pub fn bootstrap_default() -> usize {
        DEFAULT_BOOTSTRAP_REPLICAS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SET_A: &str = "xi_rad = 1.71\ndelta_rad = 0.38\nzeta_rad = -1.46\nr0 = 0.976\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::parse(SET_A, Path::new(".")).unwrap();
        assert_eq!(c.counting.scan.len(), 41);
        assert_eq!(c.beamline.n_wind, 4);
        assert!((c.beamline.guide_length_cm - 46.27).abs() < 0.01);
        assert_eq!(c.analysis.r_targets, vec![0.8, 0.6, 0.3]);
        assert_eq!(c.analysis.fit_mode, FitMode::Agnostic);
        assert_eq!(c.compare_tol_rad, 0.02);
    }

    #[test]
    fn comments_and_whitespace() {
        let text = format!("# set A\n\n{SET_A}  fit_mode =corrected   # trailing\nr_targets = 0.5 ,0.25\n");
        let c = ExperimentConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(c.analysis.fit_mode, FitMode::Corrected);
        assert_eq!(c.analysis.r_targets, vec![0.5, 0.25]);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            (format!("{SET_A}colour = blue\n"), "colour"),
            (format!("{SET_A}r0 = 0.5\n"), "r0"),
            (format!("{SET_A}counts_scale = lots\n"), "counts_scale"),
            (format!("{SET_A}guide_length_cm = 40\n"), "guide_length_cm"),
            (format!("{SET_A}fit_mode = best\n"), "fit_mode"),
            ("xi_rad = 1.0\nr0 = 0.9\n".to_string(), "delta_rad"),
            (SET_A.replace("r0 = 0.976", "r0 = 1.5"), "r0"),
            (format!("{SET_A}contamination_eps = 2\n"), "contamination_eps"),
        ];
        for (text, key) in cases {
            let err = ExperimentConfig::parse(&text, Path::new(".")).unwrap_err();
            assert!(err.to_string().contains(key), "{err} should name {key}");
        }
        let err = ExperimentConfig::parse("just words\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn axis_angle_coil() {
        let text = "coil_axis = 1, 0, 0\ncoil_angle_rad = 1.2\nr0 = 0.9\n";
        let c = ExperimentConfig::parse(text, Path::new(".")).unwrap();
        assert!(matches!(c.beamline.coil, CoilSpec::AxisAngle(_)));
        let mixed = format!("{SET_A}coil_axis = 1, 0, 0\ncoil_angle_rad = 1.2\n");
        assert!(ExperimentConfig::parse(&mixed, Path::new(".")).is_err());
        let tilted = "coil_axis = 0, 1, 0\ncoil_angle_rad = 1.2\nr0 = 0.9\n";
        let err = ExperimentConfig::parse(tilted, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("coil_axis"));
    }

    #[test]
    fn beta_realization() {
        let mut c = ExperimentConfig::parse(SET_A, Path::new(".")).unwrap();
        let b = c.realized_beta();
        assert!(b.abs() <= 0.004 && b != 0.0);
        c.expectation = true;
        assert_eq!(c.realized_beta(), 0.0);
        c.beta_fixed = Some(0.001);
        assert_eq!(c.realized_beta(), 0.001);
    }

    #[test]
    fn every_key_is_documented_once() {
        let mut names: Vec<_> = KEYS.iter().map(|(k, _)| *k).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), KEYS.len());
    }
}
