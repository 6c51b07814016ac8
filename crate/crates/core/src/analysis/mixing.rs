use crate::counting::{Channel, CountingPlan, ScanRecord};

use super::AnalysisError;

/// Absolute tolerance when matching the η grids of two scans.
pub const GRID_TOL: f64 = 1e-12;

/// How the counts of a scan were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Poisson draws; errors are `√counts`.
    Sampled,
    /// Noise-free expectations; errors are zero.
    Expectation,
}

/// One normalized intensity value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub eta: f64,
    pub value: f64,
    pub sigma: f64,
}

/// Normalized intensities along a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct IntensityScan {
    pub samples: Vec<Sample>,
    pub live_time_s: f64,
}

impl IntensityScan {
    pub fn eta(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.eta)
    }

    /// Applies `value → (value − offset)/scale` and `σ → σ/scale`.
    pub fn affine(&self, offset: f64, scale: f64) -> IntensityScan {
        IntensityScan {
            samples: self
                .samples
                .iter()
                .map(|s| Sample {
                    eta: s.eta,
                    value: (s.value - offset) / scale,
                    sigma: s.sigma / scale,
                })
                .collect(),
            live_time_s: self.live_time_s,
        }
    }

    /// Same values on a rescaled η grid.
    pub fn with_eta_scaled(&self, k: f64) -> IntensityScan {
        IntensityScan {
            samples: self.samples.iter().map(|s| Sample { eta: s.eta * k, ..*s }).collect(),
            live_time_s: self.live_time_s,
        }
    }
}

/// `Î = (counts − background)/counts_scale` with `σ_Î = √counts/counts_scale`.
///
/// No clamping is applied. A zero count takes its error from the background
/// level, or from a single count when there is no background.
pub fn normalize_counts(
    records: &[ScanRecord],
    plan: &CountingPlan,
    channel: Channel,
    mode: CountMode,
) -> IntensityScan {
    let live_time_s = records.first().map_or(plan.live_time_s, |r| r.live_time_s);
    let samples = records
        .iter()
        .map(|rec| {
            let counts = rec.counts(channel);
            let sigma = match mode {
                CountMode::Expectation => 0.0,
                CountMode::Sampled if counts > 0.0 => counts.sqrt() / plan.counts_scale,
                CountMode::Sampled => plan.background.max(1.0).sqrt() / plan.counts_scale,
            };
            Sample {
                eta: rec.eta,
                value: (counts - plan.background) / plan.counts_scale,
                sigma,
            }
        })
        .collect();
    IntensityScan { samples, live_time_s }
}

/// Target polarization for a weighted sum of the two flipper channels.
///
/// With the flipper-off beam polarized `+r0` and the flipper-on beam `−r0`,
/// `w·I_off + (1 − w)·I_on` is the intensity of a beam polarized
/// `(2w − 1)·r0`, so `w = (1 + r/r0)/2` reaches polarization `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingSpec {
    r_target: f64,
    r0: f64,
}

impl MixingSpec {
    pub fn new(r_target: f64, r0: f64) -> Result<Self, AnalysisError> {
        let ok = r_target.is_finite()
            && r0.is_finite()
            && (0.0..=1.0).contains(&r0)
            && r_target >= 0.0
            && r_target <= r0 + 1e-12;
        if !ok {
            return Err(AnalysisError::WeightOutOfRange { r_target, r0 });
        }
        Ok(Self {
            r_target: r_target.min(r0),
            r0,
        })
    }

    pub fn r_target(&self) -> f64 {
        self.r_target
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Weight of the flipper-off scan, in `[1/2, 1]`.
    pub fn weight(&self) -> f64 {
        if self.r0 == 0.0 {
            0.5
        } else {
            0.5 * (1.0 + self.r_target / self.r0)
        }
    }
}

/// Pointwise `w·Î_off + (1 − w)·Î_on`, errors added in quadrature.
pub fn mix_scans(off: &IntensityScan, on: &IntensityScan, spec: &MixingSpec) -> Result<IntensityScan, AnalysisError> {
    if off.samples.len() != on.samples.len() {
        return Err(AnalysisError::GridMismatch {
            index: off.samples.len().min(on.samples.len()),
        });
    }
    if off.live_time_s != on.live_time_s {
        return Err(AnalysisError::LiveTimeMismatch {
            off: off.live_time_s,
            on: on.live_time_s,
        });
    }
    let w = spec.weight();
    let samples = off
        .samples
        .iter()
        .zip(&on.samples)
        .enumerate()
        .map(|(index, (a, b))| {
            if (a.eta - b.eta).abs() > GRID_TOL {
                return Err(AnalysisError::GridMismatch { index });
            }
            Ok(Sample {
                eta: a.eta,
                value: w * a.value + (1.0 - w) * b.value,
                sigma: (w * w * a.sigma * a.sigma + (1.0 - w) * (1.0 - w) * b.sigma * b.sigma).sqrt(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IntensityScan {
        samples,
        live_time_s: off.live_time_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamline::ScanPlan;

    fn scan(values: &[f64]) -> IntensityScan {
        IntensityScan {
            samples: values
                .iter()
                .enumerate()
                .map(|(i, &v)| Sample {
                    eta: i as f64,
                    value: v,
                    sigma: 0.1,
                })
                .collect(),
            live_time_s: 1.0,
        }
    }

    #[test]
    fn weights() {
        assert_eq!(MixingSpec::new(0.976, 0.976).unwrap().weight(), 1.0);
        assert_eq!(MixingSpec::new(0.0, 0.976).unwrap().weight(), 0.5);
        let w = MixingSpec::new(0.8, 0.976).unwrap().weight();
        assert!((w - 0.909_836_065_573_770_5).abs() < 1e-15);
        assert!(matches!(
            MixingSpec::new(0.99, 0.976),
            Err(AnalysisError::WeightOutOfRange { .. })
        ));
        assert!(MixingSpec::new(-0.1, 0.976).is_err());
    }

    #[test]
    fn full_weight_keeps_off_scan() {
        let off = scan(&[0.1, 0.5, 0.9]);
        let on = scan(&[0.9, 0.5, 0.1]);
        let mixed = mix_scans(&off, &on, &MixingSpec::new(0.5, 0.5).unwrap()).unwrap();
        assert_eq!(mixed, off);
    }

    #[test]
    fn grid_and_live_time_checks() {
        let off = scan(&[0.1, 0.5, 0.9]);
        let mut on = scan(&[0.9, 0.5, 0.1]);
        on.samples[1].eta += 1e-6;
        let spec = MixingSpec::new(0.3, 0.9).unwrap();
        assert!(matches!(
            mix_scans(&off, &on, &spec),
            Err(AnalysisError::GridMismatch { index: 1 })
        ));
        let short = scan(&[0.9, 0.5]);
        assert!(mix_scans(&off, &short, &spec).is_err());
        let mut slow = scan(&[0.9, 0.5, 0.1]);
        slow.live_time_s = 2.0;
        assert!(matches!(
            mix_scans(&off, &slow, &spec),
            Err(AnalysisError::LiveTimeMismatch { .. })
        ));
    }

    #[test]
    fn normalization_errors() {
        let plan = CountingPlan {
            counts_scale: 1000.0,
            ..CountingPlan::new(ScanPlan::uniform(0.0, 1.0, 2).unwrap(), 0)
        };
        let rec = |c: f64| ScanRecord {
            index: 0,
            eta: 0.0,
            position_mm: 0.0,
            counts_off: c,
            counts_on: c,
            live_time_s: 1.0,
        };
        let s = normalize_counts(&[rec(500.0)], &plan, Channel::Off, CountMode::Sampled);
        assert_eq!(s.samples[0].value, 0.5);
        assert!((s.samples[0].sigma - 0.022_360_679_774_997_9).abs() < 1e-15);

        let bg = CountingPlan {
            background: 4.0,
            ..plan.clone()
        };
        let z = normalize_counts(&[rec(0.0)], &bg, Channel::On, CountMode::Sampled);
        assert_eq!(z.samples[0].value, -0.004);
        assert_eq!(z.samples[0].sigma, 0.002);

        let e = normalize_counts(&[rec(500.0)], &plan, Channel::Off, CountMode::Expectation);
        assert_eq!(e.samples[0].sigma, 0.0);
    }
}
