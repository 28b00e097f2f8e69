//! Wall-clock comparison of filtering strategies at utterance scale.
//!
//! One "utterance" is a random signal of `signal_len` samples filtered with
//! `mics` synthetic impulse responses. Strategies run round-robin within
//! each trial so slow drift in machine load affects all of them alike.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use roomsim_core::convolution::{
    best_ola_size, full_fft_size, ConvolutionPlan, Convolver, FftBackend, Strategy,
};
use roomsim_core::room_model::{truncate_rir, Rir};
use roomsim_core::sampler::derive_rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MIN_TRIALS: u32 = 5;

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub trials: u32,
    pub signal_len: usize,
    pub rir_len: usize,
    pub t60: f64,
    pub mics: u32,
    /// Cut-off thresholds; `None` is the untruncated response.
    pub etas: Vec<Option<f64>>,
    pub include_direct: bool,
    pub backend: FftBackend,
    pub seed: u64,
    pub sample_rate: u32,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            trials: 20,
            signal_len: 116_991,
            rir_len: 3893,
            t60: 0.482,
            mics: 2,
            etas: vec![None, Some(20.0), Some(10.0)],
            include_direct: false,
            backend: FftBackend::default(),
            seed: 0,
            sample_rate: 16_000,
        }
    }
}

fn serialize_cutoff<S: Serializer>(eta: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match eta {
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_str("none"),
    }
}

fn deserialize_cutoff<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cutoff {
        Db(f64),
        Label(String),
    }
    match Cutoff::deserialize(d)? {
        Cutoff::Db(v) => Ok(Some(v)),
        Cutoff::Label(s) if s == "none" => Ok(None),
        Cutoff::Label(s) => Err(serde::de::Error::custom(format!("bad cutoff '{s}'"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub strategy: Strategy,
    #[serde(serialize_with = "serialize_cutoff", deserialize_with = "deserialize_cutoff")]
    pub eta_db: Option<f64>,
    /// Longest impulse response after truncation.
    pub rir_len: usize,
    pub fft_size: Option<usize>,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub trials: u32,
    pub speedup_vs_slowest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub signal_len: usize,
    pub rir_len: usize,
    pub mics: u32,
    pub backend: FftBackend,
    pub trials: u32,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    pub fn entry(&self, strategy: Strategy, eta_db: Option<f64>) -> Option<&BenchEntry> {
        self.entries
            .iter()
            .find(|e| e.strategy == strategy && e.eta_db == eta_db)
    }

    pub fn mean_ms(&self, strategy: Strategy, eta_db: Option<f64>) -> Option<f64> {
        self.entry(strategy, eta_db).map(|e| e.mean_ms)
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "N_x = {}, N_h = {}, {} responses per utterance, {} trials, backend {}\n",
            self.signal_len, self.rir_len, self.mics, self.trials, self.backend
        );
        s += &format!(
            "{:<12} {:>7} {:>6} {:>8} {:>10} {:>10} {:>8}\n",
            "strategy", "cutoff", "N_h", "fft", "mean ms", "min ms", "speedup"
        );
        for e in &self.entries {
            s += &format!(
                "{:<12} {:>7} {:>6} {:>8} {:>10.3} {:>10.3} {:>7.2}x\n",
                e.strategy.to_string(),
                e.eta_db.map_or("none".to_string(), |v| format!("{v} dB")),
                e.rir_len,
                e.fft_size.map_or("-".to_string(), |n| n.to_string()),
                e.mean_ms,
                e.min_ms,
                e.speedup_vs_slowest
            );
        }
        s
    }
}

/// Direct-path impulse followed by an exponentially decaying diffuse tail
/// that falls 60 dB in `t60` seconds. All taps are positive.
pub fn synthetic_rir(len: usize, sample_rate: u32, t60: f64, seed: u64) -> Rir {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let decay_per_sample = -3.0 / (t60 * sample_rate as f64);
    let samples = (0..len)
        .map(|n| {
            if n == 0 {
                1.0
            } else {
                let u = 1.0 - rng.random::<f64>();
                0.5 * 10f64.powf(decay_per_sample * n as f64) * u
            }
        })
        .collect();
    Rir::new(samples, sample_rate)
}

struct Case {
    strategy: Strategy,
    eta_db: Option<f64>,
    rirs: Vec<Vec<f64>>,
    plans: Vec<ConvolutionPlan>,
    times_ms: Vec<f64>,
}

pub fn run_bench(opts: &BenchOptions) -> roomsim_core::Result<BenchReport> {
    if opts.trials < MIN_TRIALS {
        return Err(roomsim_core::Error::Config(format!(
            "at least {MIN_TRIALS} trials are required"
        )));
    }
    let mut rng = derive_rng(opts.seed, "bench", 0, "signal");
    let x: Vec<f64> = (0..opts.signal_len)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let base: Vec<Rir> = (0..opts.mics)
        .map(|m| synthetic_rir(opts.rir_len, opts.sample_rate, opts.t60, opts.seed ^ (m as u64 + 1)))
        .collect();

    let mut strategies = vec![Strategy::FullFft, Strategy::OverlapAdd];
    if opts.include_direct {
        strategies.insert(0, Strategy::Direct);
    }
    let mut cases = Vec::new();
    for &eta in &opts.etas {
        let rirs: Vec<Vec<f64>> = base
            .iter()
            .map(|h| match eta {
                Some(e) => truncate_rir(h, e).map(|t| t.samples),
                None => Ok(h.samples.clone()),
            })
            .collect::<roomsim_core::Result<_>>()?;
        for &strategy in &strategies {
            let plans = rirs
                .iter()
                .map(|h| {
                    let fft_size = match strategy {
                        Strategy::Direct => None,
                        Strategy::FullFft => Some(full_fft_size(x.len(), h.len())),
                        Strategy::OverlapAdd => Some(best_ola_size(x.len(), h.len())?),
                    };
                    Ok(ConvolutionPlan {
                        strategy,
                        fft_size,
                        predicted_cost: f64::NAN,
                    })
                })
                .collect::<roomsim_core::Result<_>>()?;
            cases.push(Case {
                strategy,
                eta_db: eta,
                rirs: rirs.clone(),
                plans,
                times_ms: Vec::with_capacity(opts.trials as usize),
            });
        }
    }

    let mut conv = Convolver::new(opts.backend);
    let mut run_case = |case: &Case| -> roomsim_core::Result<f64> {
        let t = Instant::now();
        for (h, p) in case.rirs.iter().zip(&case.plans) {
            black_box(conv.apply(black_box(&x), h, p)?);
        }
        Ok(t.elapsed().as_secs_f64() * 1e3)
    };
    for case in &cases {
        run_case(case)?;
    }
    for _ in 0..opts.trials {
        for case in cases.iter_mut() {
            let ms = run_case(case)?;
            case.times_ms.push(ms);
        }
    }

    let mut entries: Vec<BenchEntry> = cases
        .iter()
        .map(|c| BenchEntry {
            strategy: c.strategy,
            eta_db: c.eta_db,
            rir_len: c.rirs.iter().map(Vec::len).max().unwrap_or(0),
            fft_size: c.plans.iter().filter_map(|p| p.fft_size).max(),
            mean_ms: c.times_ms.iter().sum::<f64>() / c.times_ms.len() as f64,
            min_ms: c.times_ms.iter().copied().fold(f64::INFINITY, f64::min),
            trials: opts.trials,
            speedup_vs_slowest: 0.0,
        })
        .collect();
    let slowest = entries.iter().map(|e| e.mean_ms).fold(0.0, f64::max);
    for e in &mut entries {
        e.speedup_vs_slowest = slowest / e.mean_ms;
    }
    Ok(BenchReport {
        signal_len: opts.signal_len,
        rir_len: opts.rir_len,
        mics: opts.mics,
        backend: opts.backend,
        trials: opts.trials,
        entries,
    })
}
