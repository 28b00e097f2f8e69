//! Shoebox room geometry, image-method impulse responses and tail truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;
pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;
pub const DEFAULT_IMAGE_ORDER: u32 = 8;

/// A rectangular room with uniformly reflective walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomConfig {
    /// Room extent along x, y and z in meters.
    pub dimensions: [f64; 3],
    /// Per-bounce amplitude factor shared by all six walls.
    pub reflection_coefficient: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: u32,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound: f64,
    /// Per-axis image indices span `-K..=K`.
    #[serde(default = "default_image_order")]
    pub image_order: u32,
    /// Informational only; never used by synthesis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t60_estimate: Option<f64>,
}

fn default_sample_rate() -> u32 {
    DEFAULT_SAMPLE_RATE
}

fn default_speed_of_sound() -> f64 {
    DEFAULT_SPEED_OF_SOUND
}

fn default_image_order() -> u32 {
    DEFAULT_IMAGE_ORDER
}

impl RoomConfig {
    /// Room with default sampling parameters and image order.
    pub fn new(dimensions: [f64; 3], reflection_coefficient: f64) -> Self {
        Self {
            dimensions,
            reflection_coefficient,
            sample_rate: DEFAULT_SAMPLE_RATE,
            speed_of_sound: DEFAULT_SPEED_OF_SOUND,
            image_order: DEFAULT_IMAGE_ORDER,
            t60_estimate: None,
        }
    }

    pub fn with_image_order(mut self, order: u32) -> Self {
        self.image_order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dimensions.iter().all(|&d| d.is_finite() && d > 0.0) {
            return Err(Error::Config(format!(
                "room dimensions must be positive, got {:?}",
                self.dimensions
            )));
        }
        let r = self.reflection_coefficient;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Config(format!(
                "reflection coefficient must lie in (0, 1), got {r}"
            )));
        }
        if self.sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if !(self.speed_of_sound.is_finite() && self.speed_of_sound > 0.0) {
            return Err(Error::Config(format!(
                "speed of sound must be positive, got {}",
                self.speed_of_sound
            )));
        }
        Ok(())
    }

    /// Number of virtual sources, `(2K + 1)^3`.
    pub fn virtual_source_count(&self) -> usize {
        let per_axis = 2 * self.image_order as usize + 1;
        per_axis * per_axis * per_axis
    }

    /// Delay in samples for a propagation distance, rounded up.
    pub fn delay_samples(&self, distance: f64) -> usize {
        (distance * self.sample_rate as f64 / self.speed_of_sound).ceil() as usize
    }
}

/// A point source or microphone position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Placement {
    pub position: [f64; 3],
}

impl Placement {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            position: [x, y, z],
        }
    }

    /// Checks the position is strictly inside the room.
    pub fn check_inside(&self, room: &RoomConfig) -> Result<()> {
        let inside = self
            .position
            .iter()
            .zip(room.dimensions.iter())
            .all(|(&p, &l)| p.is_finite() && p > 0.0 && p < l);
        if inside {
            Ok(())
        } else {
            Err(Error::InvalidPlacement(format!(
                "{:?} is not strictly inside a room of {:?}",
                self.position, room.dimensions
            )))
        }
    }

    pub fn distance_to(&self, other: &[f64; 3]) -> f64 {
        distance(&self.position, other)
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// A sampled room impulse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rir {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    /// Tail cut-off threshold in dB, `None` when untruncated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_db: Option<f64>,
}

impl Rir {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self {
            samples,
            sample_rate,
            truncation_db: None,
        }
    }

    /// Unit impulse at index 0.
    pub fn identity(sample_rate: u32) -> Self {
        Self::new(vec![1.0], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn max_power(&self) -> f64 {
        self.samples.iter().map(|h| h * h).fold(0.0, f64::max)
    }
}

/// One virtual source of the image lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource {
    pub position: [f64; 3],
    /// Number of wall reflections along the path, `|n_x| + |n_y| + |n_z|`.
    pub reflection_count: u32,
}

fn image_coordinate(index: i64, length: f64, source: f64) -> f64 {
    let base = index as f64 * length;
    if index.rem_euclid(2) == 0 {
        base + source
    } else {
        base + (length - source)
    }
}

/// Enumerates the `(2K + 1)^3` mirrored copies of `source`.
///
/// Along each axis an even lattice index translates the source by whole room
/// lengths and an odd index mirrors it first. Ordering is x-major over
/// `-K..=K` per axis.
pub fn enumerate_images(config: &RoomConfig, source: &Placement) -> Result<Vec<ImageSource>> {
    config.validate()?;
    source.check_inside(config)?;
    let k = config.image_order as i64;
    let [lx, ly, lz] = config.dimensions;
    let [sx, sy, sz] = source.position;
    let mut images = Vec::with_capacity(config.virtual_source_count());
    for nx in -k..=k {
        let x = image_coordinate(nx, lx, sx);
        for ny in -k..=k {
            let y = image_coordinate(ny, ly, sy);
            for nz in -k..=k {
                let z = image_coordinate(nz, lz, sz);
                images.push(ImageSource {
                    position: [x, y, z],
                    reflection_count: (nx.unsigned_abs() + ny.unsigned_abs() + nz.unsigned_abs())
                        as u32,
                });
            }
        }
    }
    Ok(images)
}

/// Synthesizes the impulse response from `source` to `mic` by summing one
/// delayed impulse of amplitude `r^g / d` per virtual source.
///
/// Taps that land on the same sample are accumulated in enumeration order;
/// the result ends at the latest arrival.
pub fn synthesize_rir(config: &RoomConfig, source: &Placement, mic: &Placement) -> Result<Rir> {
    mic.check_inside(config)?;
    let images = enumerate_images(config, source)?;
    let r = config.reflection_coefficient;

    let mut taps = Vec::with_capacity(images.len());
    let mut max_delay = 0usize;
    for image in &images {
        let d = mic.distance_to(&image.position);
        if d <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "microphone at {:?} coincides with a virtual source",
                mic.position
            )));
        }
        let delay = config.delay_samples(d);
        max_delay = max_delay.max(delay);
        taps.push((delay, r.powi(image.reflection_count as i32) / d));
    }

    let mut samples = vec![0.0; max_delay + 1];
    for (delay, amplitude) in taps {
        samples[delay] += amplitude;
    }
    Ok(Rir::new(samples, config.sample_rate))
}

/// Power threshold `eta_db` below the strongest tap.
pub fn power_threshold(rir: &Rir, eta_db: f64) -> Result<f64> {
    if rir.is_empty() {
        return Err(Error::DegenerateInput("empty impulse response".into()));
    }
    if !(eta_db.is_finite() && eta_db > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "cut-off threshold must be a positive number of dB, got {eta_db}"
        )));
    }
    let peak = rir.max_power();
    if peak <= 0.0 {
        return Err(Error::DegenerateInput("all-zero impulse response".into()));
    }
    Ok(peak * 10f64.powf(-eta_db / 10.0))
}

/// Smallest index `m` such that every sample after `m` has power below
/// `p_th`.
pub fn cutoff_index(rir: &Rir, p_th: f64) -> usize {
    rir.samples
        .iter()
        .rposition(|h| h * h >= p_th)
        .unwrap_or(0)
}

/// Keeps samples `0..=n_c + 1` where `n_c` is the cut-off index for a
/// threshold `eta_db` below the peak power.
pub fn truncate_rir(rir: &Rir, eta_db: f64) -> Result<Rir> {
    let p_th = power_threshold(rir, eta_db)?;
    let n_c = cutoff_index(rir, p_th);
    let keep = (n_c + 2).min(rir.len());
    Ok(Rir {
        samples: rir.samples[..keep].to_vec(),
        sample_rate: rir.sample_rate,
        truncation_db: Some(eta_db),
    })
}
