//! Synthetic detector counts for flipper-off / flipper-on scans.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the master seed and
//! selected by `(point index, channel)`, so a scan is a pure function of its
//! inputs no matter how the points are evaluated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::beamline::{Beamline, BeamlineConfig, BeamlineError, ScanPlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountingError {
    #[error("counts_scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("background must be non-negative, got {0}")]
    InvalidBackground(f64),
    #[error("live_time_s must be positive, got {0}")]
    InvalidLiveTime(f64),
    #[error(transparent)]
    Beamline(#[from] BeamlineError),
}

/// Detector channel, i.e. state of the π flipper.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Off,
    On,
}

impl Channel {
    pub fn flipper(self) -> bool {
        matches!(self, Channel::On)
    }
}

/// Flux and noise settings for a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingPlan {
    /// Expected counts per point at unit detection probability.
    pub counts_scale: f64,
    /// Expected background counts per point.
    pub background: f64,
    pub seed: u64,
    /// Counting time per point and channel [s]; the same for every point.
    pub live_time_s: f64,
    pub scan: ScanPlan,
}

/// Expected counts per point at unit probability used when nothing else is
/// configured. Not a measured flux.
pub const DEFAULT_COUNTS_SCALE: f64 = 2000.0;

impl CountingPlan {
    pub fn new(scan: ScanPlan, seed: u64) -> Self {
        Self {
            counts_scale: DEFAULT_COUNTS_SCALE,
            background: 0.0,
            seed,
            live_time_s: 1.0,
            scan,
        }
    }

    pub fn validate(&self) -> Result<(), CountingError> {
        if !(self.counts_scale > 0.0 && self.counts_scale.is_finite()) {
            return Err(CountingError::InvalidScale(self.counts_scale));
        }
        if !(self.background >= 0.0 && self.background.is_finite()) {
            return Err(CountingError::InvalidBackground(self.background));
        }
        if !(self.live_time_s > 0.0 && self.live_time_s.is_finite()) {
            return Err(CountingError::InvalidLiveTime(self.live_time_s));
        }
        Ok(())
    }

    /// Expected counts for a detection probability.
    pub fn mean_counts(&self, probability: f64) -> f64 {
        self.counts_scale * probability + self.background
    }
}

/// One scan point with both channels.
///
/// Counts are integers when sampled and real-valued expectations otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRecord {
    pub index: usize,
    pub eta: f64,
    pub position_mm: f64,
    pub counts_off: f64,
    pub counts_on: f64,
    pub live_time_s: f64,
}

impl ScanRecord {
    pub fn counts(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Off => self.counts_off,
            Channel::On => self.counts_on,
        }
    }
}

/// Substream tags below `1 << 8` address scan points; bits above select the
/// purpose of the stream.
const TAG_POINT: u64 = 0;
const TAG_INHOMOGENEITY: u64 = 1;
const TAG_BOOTSTRAP: u64 = 2;

fn stream_id(tag: u64, index: u64, channel: Option<Channel>) -> u64 {
    let ch = match channel {
        None => 0,
        Some(Channel::Off) => 1,
        Some(Channel::On) => 2,
    };
    (index << 8) | (tag << 2) | ch
}

/// Independent random stream for `(seed, tag, index, channel)`.
fn substream(seed: u64, tag: u64, index: u64, channel: Option<Channel>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tag, index, channel));
    rng
}

/// Stream for one scan point and channel.
pub fn point_rng(seed: u64, index: usize, channel: Channel) -> ChaCha8Rng {
    substream(seed, TAG_POINT, index as u64, Some(channel))
}

/// Stream for bootstrap replica `replica`, point `index`.
pub fn bootstrap_rng(seed: u64, replica: usize, index: usize, channel: Channel) -> ChaCha8Rng {
    // Fold the replica into the key so replica streams never meet point streams.
    let key = seed ^ (replica as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    substream(key, TAG_BOOTSTRAP, index as u64, Some(channel))
}

/// One draw from `U[−β_max, β_max]` on the dedicated inhomogeneity stream.
pub fn draw_inhomogeneity(seed: u64, beta_max: f64) -> f64 {
    if beta_max == 0.0 {
        return 0.0;
    }
    let mut rng = substream(seed, TAG_INHOMOGENEITY, 0, None);
    rng.random_range(-beta_max..=beta_max)
}

/// Poisson variate with the given mean; zero for a zero mean.
///
/// `rand_distr` inverts the CDF for small means and uses a rejection
/// method above.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng)
}

fn scan_with<F>(cfg: &BeamlineConfig, plan: &CountingPlan, mut counts: F) -> Result<Vec<ScanRecord>, CountingError>
where
    F: FnMut(usize, Channel, f64) -> f64,
{
    plan.validate()?;
    let beamline = Beamline::new(cfg.clone())?;
    let positions = plan.scan.positions_mm(cfg);
    Ok(plan
        .scan
        .eta()
        .iter()
        .zip(positions)
        .enumerate()
        .map(|(index, (&eta, position_mm))| {
            let mean = |ch: Channel| plan.mean_counts(beamline.observed(ch.flipper(), eta));
            ScanRecord {
                index,
                eta,
                position_mm,
                counts_off: counts(index, Channel::Off, mean(Channel::Off)),
                counts_on: counts(index, Channel::On, mean(Channel::On)),
                live_time_s: plan.live_time_s,
            }
        })
        .collect())
}

/// Poisson-sampled counts for both channels at every scan point. The
/// flipper field of `cfg` is ignored; both settings are simulated.
pub fn simulate_scan(cfg: &BeamlineConfig, plan: &CountingPlan) -> Result<Vec<ScanRecord>, CountingError> {
    scan_with(cfg, plan, |index, ch, mean| {
        sample_poisson(&mut point_rng(plan.seed, index, ch), mean)
    })
}

/// Noise-free expected counts, `counts_scale·I + background`.
pub fn expectation_scan(cfg: &BeamlineConfig, plan: &CountingPlan) -> Result<Vec<ScanRecord>, CountingError> {
    scan_with(cfg, plan, |_, _, mean| mean)
}
