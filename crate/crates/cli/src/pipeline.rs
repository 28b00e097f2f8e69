//! Per-utterance noisification shared by `augment` and `batch`.

use std::path::{Path, PathBuf};

use rand::Rng;
use roomsim_core::audio::{read_wav, write_wav, WriteStats};
use roomsim_core::mixer::{render, MixOutput, PlanHint, Scene, SourceTerm};
use roomsim_core::room_model::{synthesize_rir, truncate_rir, Placement, RoomConfig, Rir};
use roomsim_core::sampler::{derive_rng, sample_scene};
use roomsim_core::{AudioBuffer, Error, SampleFormat, SimConfig};

use crate::args::RenderArgs;
use crate::error::{CliError, Result};

/// Largest magnitude written by `--normalize`, the top PCM16 code.
pub const NORMALIZED_PEAK: f64 = 32767.0 / 32768.0;

/// Everything needed to noisify an utterance, resolved from flags and config.
#[derive(Debug, Clone)]
pub struct Augmenter {
    pub config: SimConfig,
    pub eta_db: Option<f64>,
    pub hint: Option<PlanHint>,
    pub noise_pool: Vec<AudioBuffer>,
}

#[derive(Debug, Clone, Copy)]
pub struct OutputOptions {
    pub format: SampleFormat,
    pub normalize: bool,
    pub per_channel: bool,
}

impl OutputOptions {
    pub fn from_args(args: &RenderArgs) -> Self {
        Self {
            format: args.format.into(),
            normalize: args.normalize,
            per_channel: args.per_channel,
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    Ok(match path {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    })
}

impl Augmenter {
    /// Builds from the shared rendering flags. `config_fallback` is used when
    /// `--config` is absent.
    pub fn from_args(args: &RenderArgs, config_fallback: Option<&Path>) -> Result<Self> {
        let mut config = load_config(args.config.as_deref().or(config_fallback))?;
        if let Some(seed) = args.seed {
            config.sampler.seed = seed;
        }
        if args.fft_size.is_some() && args.strategy == crate::args::StrategyArg::Auto {
            return Err(CliError::Usage("--fft-size needs --strategy fft or ola".into()));
        }
        let noise_pool = args
            .noises
            .iter()
            .map(|p| {
                let buf = read_wav(p)?;
                check_mono_rate(&buf, config.room.sample_rate, p)?;
                Ok(buf)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            eta_db: args.eta_db,
            hint: args.strategy.hint(args.fft_size),
            noise_pool,
        })
    }

    fn rirs(&self, room: &RoomConfig, source: &Placement, mics: &[Placement]) -> Result<Vec<Rir>> {
        mics.iter()
            .map(|mic| {
                let h = synthesize_rir(room, source, mic)?;
                Ok(match self.eta_db {
                    Some(eta) => truncate_rir(&h, eta)?,
                    None => h,
                })
            })
            .collect()
    }

    /// Noise signal `index` for this key, `len` samples long.
    fn noise_signal(&self, utterance_id: &str, epoch: u64, index: usize, len: usize) -> AudioBuffer {
        let purpose = format!("noise-{index}");
        let mut rng = derive_rng(self.config.sampler.seed, utterance_id, epoch, &purpose);
        let rate = self.config.room.sample_rate;
        if self.noise_pool.is_empty() {
            let white = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            return AudioBuffer::mono(white, rate);
        }
        let pick = rng.random_range(0..self.noise_pool.len());
        let src = self.noise_pool[pick].channel(0);
        let offset = rng.random_range(0..src.len());
        let samples = src.iter().cycle().skip(offset).take(len).copied().collect();
        AudioBuffer::mono(samples, rate)
    }

    /// Draws the room for `(utterance_id, epoch)` and renders every
    /// microphone channel.
    pub fn augment(&self, utterance_id: &str, epoch: u64, input: &AudioBuffer) -> Result<MixOutput> {
        check_mono_rate(input, self.config.room.sample_rate, Path::new(utterance_id))?;
        let drawn = sample_scene(&self.config.sampler, &self.config.room, utterance_id, epoch)?;
        let target = SourceTerm {
            signal: input.clone(),
            rirs: self.rirs(&drawn.room, &drawn.target, &drawn.mics)?,
        };
        let mut scene = Scene::new(target, drawn.mics.len());
        for (i, (pos, &snr)) in drawn.noises.iter().zip(&drawn.snrs_db).enumerate() {
            let source = SourceTerm {
                signal: self.noise_signal(utterance_id, epoch, i, input.len()),
                rirs: self.rirs(&drawn.room, pos, &drawn.mics)?,
            };
            scene = scene.with_noise(source, snr);
        }
        Ok(render(&scene, self.hint)?)
    }
}

fn check_mono_rate(buf: &AudioBuffer, rate: u32, what: &Path) -> Result<()> {
    if buf.channel_count() != 1 {
        return Err(CliError::Core(Error::DegenerateInput(format!(
            "{}: expected mono audio, got {} channels",
            what.display(),
            buf.channel_count()
        ))));
    }
    if buf.is_empty() {
        return Err(CliError::Core(Error::DegenerateInput(format!(
            "{}: no samples",
            what.display()
        ))));
    }
    if buf.sample_rate() != rate {
        return Err(CliError::Core(Error::SampleRateMismatch {
            expected: rate,
            actual: buf.sample_rate(),
        }));
    }
    Ok(())
}

/// File names for one rendered utterance: `base` itself, or `stem.chJ.ext`
/// per microphone.
pub fn output_paths(base: &Path, channels: usize, per_channel: bool) -> Vec<PathBuf> {
    if !per_channel {
        return vec![base.to_path_buf()];
    }
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let ext = base
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "wav".into());
    (0..channels)
        .map(|j| base.with_file_name(format!("{stem}.ch{j}.{ext}")))
        .collect()
}

/// Writes the rendered channels; returns the paths and the saturation count.
pub fn write_outputs(
    mut channels: AudioBuffer,
    base: &Path,
    opts: &OutputOptions,
) -> Result<(Vec<PathBuf>, usize)> {
    if opts.normalize {
        channels.normalize_peak(NORMALIZED_PEAK);
    }
    if let Some(dir) = base.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    let paths = output_paths(base, channels.channel_count(), opts.per_channel);
    let mut saturated = 0;
    if opts.per_channel {
        let rate = channels.sample_rate();
        for (path, ch) in paths.iter().zip(channels.into_channels()) {
            let WriteStats { saturated: s } = write_wav(&AudioBuffer::mono(ch, rate), path, opts.format)?;
            saturated += s;
        }
    } else {
        saturated = write_wav(&channels, &paths[0], opts.format)?.saturated;
    }
    Ok((paths, saturated))
}
