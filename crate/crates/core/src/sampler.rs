//! Reproducible random rooms and scenes.
//!
//! Every draw is keyed by `(seed, utterance_id, epoch)`: the key is hashed
//! into a ChaCha stream so results never depend on batch order or worker
//! count, and the same utterance sees a fresh room each epoch.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::room_model::{Placement, RoomConfig};

/// Distributions for [`sample_scene`]. Continuous quantities are uniform
/// over their ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerSpec {
    /// Per-axis `(min, max)` room extent in meters.
    pub dimension_ranges: [(f64, f64); 3],
    pub reflection_range: (f64, f64),
    /// Weights over 0, 1, 2 and 3 noise sources.
    pub noise_source_count_weights: [f64; 4],
    pub snr_range_db: (f64, f64),
    pub mic_count: usize,
    /// Minimum distance between any placement and any wall, in meters.
    pub min_wall_clearance: f64,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            dimension_ranges: [(3.0, 10.0), (3.0, 8.0), (2.5, 4.0)],
            reflection_range: (0.2, 0.9),
            noise_source_count_weights: [0.15, 0.35, 0.30, 0.20],
            snr_range_db: (0.0, 30.0),
            mic_count: 2,
            min_wall_clearance: 0.2,
            seed: 0,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo <= hi {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} range ({lo}, {hi}) is invalid")))
    }
}

impl SamplerSpec {
    pub fn validate(&self) -> Result<()> {
        for (axis, &range) in ["x", "y", "z"].iter().zip(&self.dimension_ranges) {
            check_range(&format!("dimension {axis}"), range)?;
            if range.0 <= 2.0 * self.min_wall_clearance {
                return Err(Error::Config(format!(
                    "dimension {axis} minimum {} leaves no interior beyond a {} m clearance",
                    range.0, self.min_wall_clearance
                )));
            }
        }
        check_range("reflection", self.reflection_range)?;
        let (r_lo, r_hi) = self.reflection_range;
        if !(r_lo > 0.0 && r_hi < 1.0) {
            return Err(Error::Config(format!(
                "reflection range ({r_lo}, {r_hi}) must lie inside (0, 1)"
            )));
        }
        check_range("snr", self.snr_range_db)?;
        let w = &self.noise_source_count_weights;
        if w.iter().any(|&x| !(x.is_finite() && x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(format!(
                "noise-count weights {w:?} must be non-negative and not all zero"
            )));
        }
        if self.mic_count == 0 {
            return Err(Error::Config("mic_count must be at least 1".into()));
        }
        if !(self.min_wall_clearance.is_finite() && self.min_wall_clearance >= 0.0) {
            return Err(Error::Config("wall clearance must be non-negative".into()));
        }
        Ok(())
    }

    /// Mean of the noise-source count distribution.
    pub fn expected_noise_count(&self) -> f64 {
        let w = &self.noise_source_count_weights;
        let total: f64 = w.iter().sum();
        w.iter().enumerate().map(|(k, &p)| k as f64 * p).sum::<f64>() / total
    }
}

/// One randomly drawn acoustic environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledScene {
    pub room: RoomConfig,
    pub target: Placement,
    pub noises: Vec<Placement>,
    pub mics: Vec<Placement>,
    /// Requested SNR per noise source, aligned with `noises`.
    pub snrs_db: Vec<f64>,
}

/// Deterministic random stream for one `(seed, utterance, epoch)` key.
///
/// `purpose` separates independent consumers of the same key.
pub fn derive_rng(seed: u64, utterance_id: &str, epoch: u64, purpose: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(epoch.to_le_bytes());
    hasher.update((utterance_id.len() as u64).to_le_bytes());
    hasher.update(utterance_id.as_bytes());
    hasher.update(purpose.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn sample_placement<R: Rng>(rng: &mut R, dims: &[f64; 3], clearance: f64) -> Placement {
    let mut p = [0.0; 3];
    for (coord, &len) in p.iter_mut().zip(dims) {
        *coord = uniform(rng, (clearance, len - clearance));
    }
    Placement { position: p }
}

/// Draws a room, a target, 0 to 3 noise sources, `mic_count` microphones
/// and per-noise SNRs.
///
/// `base` supplies the sampling rate, speed of sound and image order; its
/// geometry and reflectivity are replaced by sampled values.
pub fn sample_scene(
    spec: &SamplerSpec,
    base: &RoomConfig,
    utterance_id: &str,
    epoch: u64,
) -> Result<SampledScene> {
    spec.validate()?;
    let mut rng = derive_rng(spec.seed, utterance_id, epoch, "scene");

    let mut dims = [0.0; 3];
    for (d, &range) in dims.iter_mut().zip(&spec.dimension_ranges) {
        *d = uniform(&mut rng, range);
    }
    let room = RoomConfig {
        dimensions: dims,
        reflection_coefficient: uniform(&mut rng, spec.reflection_range),
        t60_estimate: None,
        ..base.clone()
    };
    room.validate()?;

    let clearance = spec.min_wall_clearance;
    let target = sample_placement(&mut rng, &dims, clearance);
    let count_dist = WeightedIndex::new(spec.noise_source_count_weights)
        .map_err(|e| Error::Config(format!("noise-count weights: {e}")))?;
    let noise_count = count_dist.sample(&mut rng);
    let noises: Vec<_> = (0..noise_count)
        .map(|_| sample_placement(&mut rng, &dims, clearance))
        .collect();
    let snrs_db = (0..noise_count)
        .map(|_| uniform(&mut rng, spec.snr_range_db))
        .collect();
    let mics = (0..spec.mic_count)
        .map(|_| sample_placement(&mut rng, &dims, clearance))
        .collect();

    Ok(SampledScene {
        room,
        target,
        noises,
        mics,
        snrs_db,
    })
}
