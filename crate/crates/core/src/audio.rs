//! Audio buffers, WAV files, JSON configuration and batch manifests.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::room_model::RoomConfig;
use crate::sampler::SamplerSpec;

/// Multi-channel sample data in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::DegenerateInput("audio buffer has no channels".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::DegenerateInput(
                "audio channels differ in length".into(),
            ));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Self {
        assert!(sample_rate > 0, "sample rate must be positive");
        Self {
            channels: vec![samples],
            sample_rate,
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// The single channel of a mono buffer.
    pub fn as_mono(&self) -> Result<&[f64]> {
        if self.channels.len() != 1 {
            return Err(Error::DegenerateInput(format!(
                "expected a mono signal, got {} channels",
                self.channels.len()
            )));
        }
        Ok(&self.channels[0])
    }

    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0, |m, &s| f64::max(m, s.abs()))
    }

    /// Mean squared amplitude across all channels.
    pub fn mean_power(&self) -> f64 {
        let n = self.len() * self.channel_count();
        if n == 0 {
            return 0.0;
        }
        self.channels.iter().flatten().map(|s| s * s).sum::<f64>() / n as f64
    }

    pub fn scale(&mut self, gain: f64) {
        self.channels
            .iter_mut()
            .flatten()
            .for_each(|s| *s *= gain);
    }

    /// Scales so the largest magnitude becomes `target`; silent buffers are
    /// left untouched.
    pub fn normalize_peak(&mut self, target: f64) {
        let peak = self.peak();
        if peak > 0.0 {
            self.scale(target / peak);
        }
    }
}

/// On-disk sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

impl FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pcm16" => Ok(Self::Pcm16),
            "float32" => Ok(Self::Float32),
            other => Err(format!("unknown sample format '{other}'")),
        }
    }
}

/// Outcome of [`write_wav`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteStats {
    /// Samples clamped to the PCM16 range.
    pub saturated: usize,
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::UnsupportedFormat("zero channels".into()));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: {bits}-bit {format:?} samples",
                path.display()
            )))
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::UnsupportedFormat(format!(
            "{}: truncated sample data",
            path.display()
        )));
    }
    let frames = interleaved.len() / channels;
    let mut data = vec![Vec::with_capacity(frames); channels];
    for frame in interleaved.chunks_exact(channels) {
        for (c, &s) in frame.iter().enumerate() {
            data[c].push(s);
        }
    }
    AudioBuffer::new(data, spec.sample_rate)
}

/// Rounds to the nearest PCM16 code, ties away from zero, saturating at the
/// range limits. Returns the code and whether it was clamped.
pub fn quantize_pcm16(sample: f64) -> (i16, bool) {
    let scaled = (sample * 32768.0).round();
    if scaled > i16::MAX as f64 {
        (i16::MAX, true)
    } else if scaled < i16::MIN as f64 {
        (i16::MIN, true)
    } else {
        (scaled as i16, false)
    }
}

pub fn write_wav(
    buffer: &AudioBuffer,
    path: impl AsRef<Path>,
    format: SampleFormat,
) -> Result<WriteStats> {
    let path = path.as_ref();
    if let Some(i) = buffer
        .channels
        .iter()
        .flat_map(|c| c.iter().enumerate())
        .find_map(|(i, s)| (!s.is_finite()).then_some(i))
    {
        return Err(Error::NonFinite(i));
    }
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let spec = hound::WavSpec {
        channels: buffer.channel_count() as u16,
        sample_rate: buffer.sample_rate,
        bits_per_sample: match format {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Float32 => 32,
        },
        sample_format: match format {
            SampleFormat::Pcm16 => hound::SampleFormat::Int,
            SampleFormat::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    let mut stats = WriteStats::default();
    for frame in 0..buffer.len() {
        for channel in &buffer.channels {
            let s = channel[frame];
            match format {
                SampleFormat::Pcm16 => {
                    let (code, clipped) = quantize_pcm16(s);
                    stats.saturated += clipped as usize;
                    writer.write_sample(code).map_err(wav_err)?;
                }
                SampleFormat::Float32 => writer.write_sample(s as f32).map_err(wav_err)?,
            }
        }
    }
    writer.finalize().map_err(wav_err)?;
    if stats.saturated > 0 {
        log::warn!(
            "{}: {} samples saturated during PCM16 export",
            path.display(),
            stats.saturated
        );
    }
    Ok(stats)
}

/// Top-level JSON configuration shared by the CLI commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Fixed room used when explicit coordinates are given. Its sampling
    /// parameters are also applied to randomly sampled rooms.
    pub room: RoomConfig,
    #[serde(default)]
    pub sampler: SamplerSpec,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            room: RoomConfig::new([6.5, 5.0, 3.0], 0.7),
            sampler: SamplerSpec::default(),
        }
    }
}

impl SimConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: SimConfig =
            serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        config.room.validate()?;
        config.sampler.validate()?;
        Ok(config)
    }
}

/// One line of a JSON-lines manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub utterance_id: String,
    pub input: PathBuf,
    pub output: PathBuf,
}

/// A batch of utterances to noisify.
///
/// The first line may be a header object `{"config": ..., "epoch": ...}`;
/// every other non-blank line is a [`ManifestRecord`]. Relative paths are
/// resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub config: Option<PathBuf>,
    pub epoch: Option<u64>,
    pub records: Vec<ManifestRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestHeader {
    #[serde(default)]
    config: Option<PathBuf>,
    #[serde(default)]
    epoch: Option<u64>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut manifest = Manifest::default();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let json_err = |source| Error::Json {
                path: path.to_path_buf(),
                source,
            };
            if lineno == 0 && !line.contains("\"utterance_id\"") {
                let header: ManifestHeader = serde_json::from_str(line).map_err(json_err)?;
                manifest.config = header.config.map(|p| base.join(p));
                manifest.epoch = header.epoch;
                continue;
            }
            let mut record: ManifestRecord = serde_json::from_str(line).map_err(json_err)?;
            record.input = base.join(&record.input);
            record.output = base.join(&record.output);
            manifest.records.push(record);
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if r.utterance_id.is_empty() {
                return Err(Error::Manifest("empty utterance_id".into()));
            }
            if r.input.as_os_str().is_empty() || r.output.as_os_str().is_empty() {
                return Err(Error::Manifest(format!(
                    "record '{}' has an empty path",
                    r.utterance_id
                )));
            }
            if !seen.insert(r.utterance_id.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate utterance_id '{}'",
                    r.utterance_id
                )));
            }
        }
        Ok(())
    }

    /// Writes the manifest as JSON lines, header first. Paths are written as
    /// stored.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        if self.config.is_some() || self.epoch.is_some() {
            let header = serde_json::json!({ "config": self.config, "epoch": self.epoch });
            writeln!(out, "{header}").map_err(io_err)?;
        }
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            writeln!(out, "{line}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}
