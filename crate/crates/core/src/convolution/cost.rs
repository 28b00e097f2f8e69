//! Closed-form real-multiplication counts and FFT-size planning.
//!
//! Each FFT or inverse FFT of size `N` is charged `(N/2) log2 N`
//! multiplications and each complex product four, evaluated over the
//! `N/2 + 1` non-redundant bins. These are planning heuristics, not timings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest FFT size the planner and the real transform accept.
pub const MIN_FFT_SIZE: usize = 2;

/// Problem size for the cost models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    /// Number of sources `I`; fractional values model averages.
    pub num_sources: f64,
    /// Number of microphones `J`.
    pub num_mics: u32,
    /// Signal length `N_x` in samples.
    pub signal_len: usize,
    /// Impulse response length `N_h` in samples.
    pub rir_len: usize,
}

impl CostInputs {
    pub fn new(num_sources: f64, num_mics: u32, signal_len: usize, rir_len: usize) -> Result<Self> {
        let c = Self {
            num_sources,
            num_mics,
            signal_len,
            rir_len,
        };
        c.validate()?;
        Ok(c)
    }

    /// One source, one microphone.
    pub fn single(signal_len: usize, rir_len: usize) -> Result<Self> {
        Self::new(1.0, 1, signal_len, rir_len)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.num_sources.is_finite() && self.num_sources > 0.0)
            || self.num_mics == 0
            || self.signal_len == 0
            || self.rir_len == 0
        {
            return Err(Error::Plan(format!(
                "cost inputs must be strictly positive: {self:?}"
            )));
        }
        Ok(())
    }

    fn channels(&self) -> f64 {
        self.num_sources * self.num_mics as f64
    }

    /// Length of the full linear convolution, `N_x + N_h - 1`.
    pub fn output_len(&self) -> usize {
        self.signal_len + self.rir_len - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Direct,
    FullFft,
    OverlapAdd,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::FullFft => "full_fft",
            Self::OverlapAdd => "overlap_add",
        })
    }
}

/// A filtering strategy with its FFT size and modelled cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionPlan {
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fft_size: Option<usize>,
    pub predicted_cost: f64,
}

fn check_power_of_two(fft_size: usize) -> Result<()> {
    if fft_size < MIN_FFT_SIZE || !fft_size.is_power_of_two() {
        return Err(Error::Plan(format!(
            "FFT size must be a power of two >= {MIN_FFT_SIZE}, got {fft_size}"
        )));
    }
    Ok(())
}

fn n_log2_n(n: usize) -> f64 {
    n as f64 * n.trailing_zeros() as f64
}

/// Multiplications for time-domain convolution, `I J N_x N_h`.
pub fn cost_direct(c: &CostInputs) -> Result<f64> {
    c.validate()?;
    Ok(c.channels() * c.signal_len as f64 * c.rir_len as f64)
}

/// Smallest legal single-shot FFT size, the next power of two at or above
/// `N_x + N_h - 1`.
pub fn full_fft_size(signal_len: usize, rir_len: usize) -> usize {
    (signal_len + rir_len - 1)
        .next_power_of_two()
        .max(MIN_FFT_SIZE)
}

/// Multiplications for one FFT of the whole signal, `I J (6 N log2 N + 2 N)`.
pub fn cost_full_fft(c: &CostInputs, fft_size: usize) -> Result<f64> {
    c.validate()?;
    check_power_of_two(fft_size)?;
    if fft_size < c.output_len() {
        return Err(Error::Plan(format!(
            "FFT size {fft_size} is shorter than the {} output samples",
            c.output_len()
        )));
    }
    let n = fft_size as f64;
    Ok(c.channels() * (6.0 * n_log2_n(fft_size) + 2.0 * n))
}

/// New input samples consumed per overlap-add block, `N - N_h + 1`.
pub fn ola_block_len(fft_size: usize, rir_len: usize) -> Result<usize> {
    check_power_of_two(fft_size)?;
    if fft_size < rir_len {
        return Err(Error::Plan(format!(
            "FFT size {fft_size} cannot hold a {rir_len}-tap impulse response"
        )));
    }
    Ok(fft_size - rir_len + 1)
}

/// Overlap-add block count, `ceil(N_x / (N - N_h + 1))`.
pub fn ola_block_count(signal_len: usize, fft_size: usize, rir_len: usize) -> Result<usize> {
    Ok(signal_len.div_ceil(ola_block_len(fft_size, rir_len)?))
}

/// Multiplications for overlap-add filtering:
/// `I J (B (4 N log2 N + 2 N) + 2 N log2 N)`, with the block count `B`
/// rounded up so every input sample is covered.
pub fn cost_ola(c: &CostInputs, fft_size: usize) -> Result<f64> {
    c.validate()?;
    let blocks = ola_block_count(c.signal_len, fft_size, c.rir_len)? as f64;
    let n = fft_size as f64;
    let nlogn = n_log2_n(fft_size);
    Ok(c.channels() * (blocks * (4.0 * nlogn + 2.0 * n) + 2.0 * nlogn))
}

/// Every plan the planner considers: the single-shot FFT at its minimum
/// legal size, then overlap-add at each power of two from the first that
/// holds the impulse response up to that size. Ascending FFT size, with the
/// single-shot entry placed before the overlap-add entry of equal size.
pub fn candidate_plans(c: &CostInputs) -> Result<Vec<ConvolutionPlan>> {
    c.validate()?;
    let full_size = full_fft_size(c.signal_len, c.rir_len);
    let mut plans = Vec::new();
    let mut n = c.rir_len.next_power_of_two().max(MIN_FFT_SIZE);
    while n <= full_size {
        if n == full_size {
            plans.push(ConvolutionPlan {
                strategy: Strategy::FullFft,
                fft_size: Some(full_size),
                predicted_cost: cost_full_fft(c, full_size)?,
            });
        }
        plans.push(ConvolutionPlan {
            strategy: Strategy::OverlapAdd,
            fft_size: Some(n),
            predicted_cost: cost_ola(c, n)?,
        });
        n *= 2;
    }
    Ok(plans)
}

/// Cheapest candidate from [`candidate_plans`]. Ties go to the smaller FFT
/// size, then to the single-shot FFT.
pub fn plan(c: &CostInputs) -> Result<ConvolutionPlan> {
    let candidates = candidate_plans(c)?;
    let mut best = candidates[0];
    for p in &candidates[1..] {
        if p.predicted_cost < best.predicted_cost {
            best = *p;
        }
    }
    Ok(best)
}
