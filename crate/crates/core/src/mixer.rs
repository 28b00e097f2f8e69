//! Multi-source, multi-microphone rendering.
//!
//! Each microphone receives the reverberant target at unit gain plus every
//! reverberant noise source scaled so that its power sits `snr_db` below the
//! reverberant target at that microphone. Powers are mean squares over the
//! full reverberant buffers.

use crate::audio::AudioBuffer;
use crate::convolution::{with_thread_convolver, ConvolutionPlan, Convolver, Strategy};
use crate::error::{Error, Result};
use crate::room_model::Rir;

/// A dry source signal with one impulse response per microphone.
#[derive(Debug, Clone)]
pub struct SourceTerm {
    pub signal: AudioBuffer,
    pub rirs: Vec<Rir>,
}

#[derive(Debug, Clone)]
pub struct NoiseTerm {
    pub source: SourceTerm,
    pub snr_db: f64,
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub target: SourceTerm,
    pub noises: Vec<NoiseTerm>,
    pub mic_count: usize,
}

impl Scene {
    pub fn new(target: SourceTerm, mic_count: usize) -> Self {
        Self {
            target,
            noises: Vec::new(),
            mic_count,
        }
    }

    pub fn with_noise(mut self, source: SourceTerm, snr_db: f64) -> Self {
        self.noises.push(NoiseTerm { source, snr_db });
        self
    }

    /// Number of sources `I`, target included.
    pub fn source_count(&self) -> usize {
        1 + self.noises.len()
    }

    fn sources(&self) -> impl Iterator<Item = &SourceTerm> {
        std::iter::once(&self.target).chain(self.noises.iter().map(|n| &n.source))
    }

    pub fn validate(&self) -> Result<()> {
        if self.mic_count == 0 {
            return Err(Error::Config("scene needs at least one microphone".into()));
        }
        let rate = self.target.signal.sample_rate();
        for (i, src) in self.sources().enumerate() {
            src.signal.as_mono()?;
            if src.signal.is_empty() {
                return Err(Error::DegenerateInput(format!("source {i} is empty")));
            }
            if src.rirs.len() != self.mic_count {
                return Err(Error::Config(format!(
                    "source {i} has {} impulse responses for {} microphones",
                    src.rirs.len(),
                    self.mic_count
                )));
            }
            if src.signal.sample_rate() != rate {
                return Err(Error::SampleRateMismatch {
                    expected: rate,
                    actual: src.signal.sample_rate(),
                });
            }
            if let Some(h) = src.rirs.iter().find(|h| h.sample_rate != rate) {
                return Err(Error::SampleRateMismatch {
                    expected: rate,
                    actual: h.sample_rate,
                });
            }
        }
        Ok(())
    }
}

/// How render chooses a convolution strategy for each source/mic pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanHint {
    pub strategy: Strategy,
    /// Fixed FFT size; `None` lets the strategy pick its own.
    pub fft_size: Option<usize>,
}

impl PlanHint {
    pub fn strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            fft_size: None,
        }
    }

    fn as_plan(&self) -> ConvolutionPlan {
        ConvolutionPlan {
            strategy: self.strategy,
            fft_size: self.fft_size,
            predicted_cost: f64::NAN,
        }
    }
}

/// `I x J` gains, row 0 is the target.
pub type GainMatrix = Vec<Vec<f64>>;

#[derive(Debug, Clone)]
pub struct MixOutput {
    pub channels: AudioBuffer,
    pub gains: GainMatrix,
}

fn mean_square(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Gain for a noise buffer so the target-to-noise power ratio equals
/// `snr_db`.
pub fn compute_gain(
    target_reverberant: &AudioBuffer,
    noise_reverberant: &AudioBuffer,
    snr_db: f64,
) -> Result<f64> {
    gain_for_snr(
        target_reverberant.channels().concat().as_slice(),
        noise_reverberant.channels().concat().as_slice(),
        snr_db,
    )
}

pub(crate) fn gain_for_snr(target: &[f64], noise: &[f64], snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::DegenerateInput(format!("SNR must be finite, got {snr_db}")));
    }
    if target.is_empty() || noise.is_empty() {
        return Err(Error::DegenerateInput("empty buffer in gain computation".into()));
    }
    let p_target = mean_square(target);
    let p_noise = mean_square(noise);
    if p_target <= 0.0 {
        return Err(Error::DegenerateInput("target has zero energy".into()));
    }
    if p_noise <= 0.0 {
        return Err(Error::DegenerateInput("noise has zero energy".into()));
    }
    Ok((p_target / p_noise * 10f64.powf(-snr_db / 10.0)).sqrt())
}

/// SNR in dB between two buffers by mean-square power.
pub fn measure_snr_db(target: &[f64], noise: &[f64]) -> f64 {
    10.0 * (mean_square(target) / mean_square(noise)).log10()
}

/// Convolves every source with every microphone response, sources outer.
fn reverberate(
    scene: &Scene,
    hint: Option<PlanHint>,
    conv: &mut Convolver,
) -> Result<Vec<Vec<Vec<f64>>>> {
    scene
        .sources()
        .map(|src| {
            let x = src.signal.as_mono()?;
            src.rirs
                .iter()
                .map(|h| match hint {
                    Some(hint) => conv.apply(x, &h.samples, &hint.as_plan()),
                    None => conv.auto(x, &h.samples),
                })
                .collect()
        })
        .collect()
}

fn mix(scene: &Scene, wet: &[Vec<Vec<f64>>], gains: &GainMatrix) -> Result<AudioBuffer> {
    let out_len = wet.iter().flatten().map(Vec::len).max().unwrap_or(0);
    let channels = (0..scene.mic_count)
        .map(|j| {
            let mut y = vec![0.0; out_len];
            for (i, per_mic) in wet.iter().enumerate() {
                let g = gains[i][j];
                for (acc, &v) in y.iter_mut().zip(&per_mic[j]) {
                    *acc += g * v;
                }
            }
            y
        })
        .collect();
    AudioBuffer::new(channels, scene.target.signal.sample_rate())
}

/// Renders every microphone channel, deriving noise gains from the requested
/// SNRs.
pub fn render(scene: &Scene, hint: Option<PlanHint>) -> Result<MixOutput> {
    with_thread_convolver(|conv| render_with(scene, hint, conv))
}

pub fn render_with(scene: &Scene, hint: Option<PlanHint>, conv: &mut Convolver) -> Result<MixOutput> {
    scene.validate()?;
    let wet = reverberate(scene, hint, conv)?;
    let mut gains = vec![vec![1.0; scene.mic_count]];
    for (n, noise) in scene.noises.iter().enumerate() {
        let row = (0..scene.mic_count)
            .map(|j| gain_for_snr(&wet[0][j], &wet[n + 1][j], noise.snr_db))
            .collect::<Result<Vec<_>>>()?;
        gains.push(row);
    }
    let channels = mix(scene, &wet, &gains)?;
    Ok(MixOutput { channels, gains })
}

/// Renders with caller-supplied gains; the scene's SNRs are ignored.
pub fn render_with_gains(
    scene: &Scene,
    gains: &GainMatrix,
    hint: Option<PlanHint>,
) -> Result<MixOutput> {
    scene.validate()?;
    if gains.len() != scene.source_count() || gains.iter().any(|r| r.len() != scene.mic_count) {
        return Err(Error::Config(format!(
            "gain matrix must be {} x {}",
            scene.source_count(),
            scene.mic_count
        )));
    }
    let wet = with_thread_convolver(|conv| reverberate(scene, hint, conv))?;
    let channels = mix(scene, &wet, gains)?;
    Ok(MixOutput {
        channels,
        gains: gains.clone(),
    })
}
