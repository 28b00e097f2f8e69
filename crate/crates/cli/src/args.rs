use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roomsim_core::convolution::{FftBackend, Strategy};
use roomsim_core::mixer::PlanHint;
use roomsim_core::SampleFormat;

#[derive(Debug, Parser)]
#[command(name = "roomsim", version, about = "Room impulse response synthesis and far-field speech augmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize one room impulse response.
    Rir(RirArgs),
    /// Noisify a single utterance in a randomly sampled room.
    Augment(AugmentArgs),
    /// Noisify every utterance listed in a manifest.
    Batch(BatchArgs),
    /// Tabulate the multiplication-count models and the optimal FFT size.
    Cost(CostArgs),
    /// Time full-FFT and overlap-add filtering at utterance scale.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Direct,
    Fft,
    Ola,
}

impl StrategyArg {
    pub fn hint(self, fft_size: Option<usize>) -> Option<PlanHint> {
        let strategy = match self {
            Self::Auto => return None,
            Self::Direct => Strategy::Direct,
            Self::Fft => Strategy::FullFft,
            Self::Ola => Strategy::OverlapAdd,
        };
        Some(PlanHint { strategy, fft_size })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Pcm16,
    Float32,
}

impl From<FormatArg> for SampleFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Pcm16 => SampleFormat::Pcm16,
            FormatArg::Float32 => SampleFormat::Float32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Radix2,
    Rustfft,
}

impl From<BackendArg> for FftBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Radix2 => FftBackend::Radix2,
            BackendArg::Rustfft => FftBackend::RustFft,
        }
    }
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<_> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got '{s}'"));
    }
    let mut p = [0.0; 3];
    for (v, part) in p.iter_mut().zip(parts) {
        *v = part
            .parse()
            .map_err(|_| format!("'{part}' is not a number"))?;
    }
    Ok(p)
}

fn parse_positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("'{s}' is not a positive number")),
    }
}

/// Flags shared by the rendering commands.
#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// JSON simulation config (room defaults and sampler).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sampler seed; overrides the config file.
    #[arg(long, env = "ROOMSIM_SEED")]
    pub seed: Option<u64>,
    /// Cut RIR tails this many dB below their peak power.
    #[arg(long, value_parser = parse_positive_f64)]
    pub eta_db: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// FFT size for the forced strategy.
    #[arg(long, requires = "strategy")]
    pub fft_size: Option<usize>,
    /// Peak-normalize each output file before writing.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value = "pcm16")]
    pub format: FormatArg,
    /// Write one mono file per microphone instead of one multichannel file.
    #[arg(long)]
    pub per_channel: bool,
    /// Noise recordings to draw from; white noise when none are given.
    #[arg(long = "noise")]
    pub noises: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RirArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Source position `x,y,z` in meters.
    #[arg(long, value_parser = parse_point, requires = "mic")]
    pub source: Option<[f64; 3]>,
    /// Microphone position `x,y,z` in meters.
    #[arg(long, value_parser = parse_point, requires = "source")]
    pub mic: Option<[f64; 3]>,
    /// Seed for sampling a room and placements when no coordinates are
    /// given; falls back to the config's sampler seed.
    #[arg(long, env = "ROOMSIM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value = "rir")]
    pub utterance_id: String,
    #[arg(long, default_value_t = 0)]
    pub epoch: u64,
    #[arg(long, value_parser = parse_positive_f64)]
    pub eta_db: Option<f64>,
    /// Output path; `.json` writes a JSON array, anything else a WAV file.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "float32")]
    pub format: FormatArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct AugmentArgs {
    /// Mono input utterance.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output path prefix; `.wav` (or `.chJ.wav` per channel) is appended.
    #[arg(long, short)]
    pub output_prefix: PathBuf,
    /// Key for the room draw; defaults to the input file stem.
    #[arg(long)]
    pub utterance_id: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub epoch: u64,
    #[command(flatten)]
    pub render: RenderArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    /// JSON-lines manifest.
    #[arg(long, short)]
    pub manifest: PathBuf,
    /// Overrides the manifest's epoch.
    #[arg(long)]
    pub epoch: Option<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub parallelism: u32,
    #[command(flatten)]
    pub render: RenderArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    /// Number of sources I, fractional for averages.
    #[arg(value_parser = parse_positive_f64)]
    pub sources: f64,
    /// Number of microphones J.
    #[arg(value_parser = clap::value_parser!(u32).range(1..))]
    pub mics: u32,
    /// Signal length N_x in samples.
    #[arg(value_parser = clap::value_parser!(u64).range(1..))]
    pub signal_len: u64,
    /// Impulse response length N_h in samples.
    #[arg(value_parser = clap::value_parser!(u64).range(1..))]
    pub rir_len: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(5..))]
    pub trials: u32,
    #[arg(long, default_value_t = 116_991)]
    pub signal_len: usize,
    #[arg(long, default_value_t = 3893)]
    pub rir_len: usize,
    /// Reverberation time of the synthetic impulse response.
    #[arg(long, default_value_t = 0.482, value_parser = parse_positive_f64)]
    pub t60: f64,
    /// Impulse responses filtered per utterance.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub mics: u32,
    /// Comma-separated cut-off thresholds in dB; `none` means untruncated.
    #[arg(long, default_value = "none,20,10", value_delimiter = ',')]
    pub eta_list: Vec<String>,
    /// Also time direct convolution; only sensible for small sizes.
    #[arg(long)]
    pub include_direct: bool,
    #[arg(long, value_enum, default_value = "rustfft")]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("1, 2.5,3").unwrap(), [1.0, 2.5, 3.0]);
        assert!(parse_point("1,2").is_err());
        assert!(parse_point("a,b,c").is_err());
    }

    #[test]
    fn bench_trials_floor() {
        assert!(Cli::try_parse_from(["roomsim", "bench", "--trials", "4"]).is_err());
        assert!(Cli::try_parse_from(["roomsim", "bench", "--trials", "5"]).is_ok());
    }

    #[test]
    fn cost_positionals() {
        let cli = Cli::try_parse_from(["roomsim", "cost", "2.55", "2", "116991", "3893"]).unwrap();
        match cli.command {
            Command::Cost(c) => {
                assert_eq!(c.sources, 2.55);
                assert_eq!(c.rir_len, 3893);
            }
            _ => panic!(),
        }
        assert!(Cli::try_parse_from(["roomsim", "cost", "0", "2", "1", "1"]).is_err());
    }

    #[test]
    fn strategy_hints() {
        assert_eq!(StrategyArg::Auto.hint(None), None);
        assert_eq!(
            StrategyArg::Ola.hint(Some(1024)),
            Some(PlanHint {
                strategy: Strategy::OverlapAdd,
                fft_size: Some(1024)
            })
        );
    }
}
