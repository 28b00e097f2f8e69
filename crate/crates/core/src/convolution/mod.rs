//! Linear convolution of a signal with an impulse response.
//!
//! Three strategies produce the same `N_x + N_h - 1` samples:
//!
//! * direct summation, used as the reference,
//! * one real FFT large enough for the whole output,
//! * overlap-add: blocks of `N - N_h + 1` input samples are filtered with
//!   size-`N` FFTs against a single precomputed spectrum of the response.
//!
//! [`cost`] models the multiplication count of each and picks the FFT size.

pub mod cost;
pub mod fft;

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::room_model::Rir;

pub use cost::{
    candidate_plans, cost_direct, cost_full_fft, cost_ola, full_fft_size, ola_block_count,
    ola_block_len, plan, ConvolutionPlan, CostInputs, Strategy, MIN_FFT_SIZE,
};
pub use fft::{FftBackend, RealFft};

/// Transform counts from one overlap-add run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OlaStats {
    /// Forward transforms of the impulse response.
    pub kernel_transforms: usize,
    pub block_transforms: usize,
    pub inverse_transforms: usize,
    pub blocks: usize,
}

/// Reference time-domain convolution.
pub fn direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; x.len() + h.len() - 1];
    for (i, &xv) in x.iter().enumerate() {
        for (acc, &hv) in out[i..i + h.len()].iter_mut().zip(h) {
            *acc += xv * hv;
        }
    }
    out
}

/// FFT convolution engine with cached plans and scratch buffers.
///
/// Holds mutable scratch, so each worker owns its own instance.
#[derive(Debug, Default)]
pub struct Convolver {
    backend: FftBackend,
    plans: HashMap<usize, Arc<RealFft>>,
    scratch: Vec<Complex64>,
    kernel_spectrum: Vec<Complex64>,
    block_spectrum: Vec<Complex64>,
    block: Vec<f64>,
}

impl Convolver {
    pub fn new(backend: FftBackend) -> Self {
        Self {
            backend,
            ..Default::default()
        }
    }

    pub fn backend(&self) -> FftBackend {
        self.backend
    }

    fn prepare(&mut self, fft_size: usize) -> Result<Arc<RealFft>> {
        let fft = match self.plans.get(&fft_size) {
            Some(fft) => fft.clone(),
            None => {
                let fft = Arc::new(RealFft::new(fft_size, self.backend)?);
                self.plans.insert(fft_size, fft.clone());
                fft
            }
        };
        let bins = fft.spectrum_len();
        self.scratch.resize(fft.scratch_len(), Complex64::default());
        self.kernel_spectrum.resize(bins, Complex64::default());
        self.block_spectrum.resize(bins, Complex64::default());
        self.block.resize(fft_size, 0.0);
        Ok(fft)
    }

    /// Zero-pads `data` into the block buffer and transforms it.
    fn transform_padded(&mut self, fft: &RealFft, data: &[f64], into_kernel: bool) {
        self.block[..data.len()].copy_from_slice(data);
        self.block[data.len()..].fill(0.0);
        let out = if into_kernel {
            &mut self.kernel_spectrum
        } else {
            &mut self.block_spectrum
        };
        fft.forward(&self.block, out, &mut self.scratch);
    }

    fn multiply_and_invert(&mut self, fft: &RealFft) {
        for (b, k) in self.block_spectrum.iter_mut().zip(&self.kernel_spectrum) {
            *b *= *k;
        }
        fft.inverse(&self.block_spectrum, &mut self.block, &mut self.scratch);
    }

    /// Convolution through a single FFT of the smallest power-of-two size
    /// that holds the whole output.
    pub fn full_fft(&mut self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        check_nonempty(x, h)?;
        let out_len = x.len() + h.len() - 1;
        let fft = self.prepare(full_fft_size(x.len(), h.len()))?;
        self.transform_padded(&fft, h, true);
        self.transform_padded(&fft, x, false);
        self.multiply_and_invert(&fft);
        Ok(self.block[..out_len].to_vec())
    }

    /// Overlap-add convolution with FFT size `fft_size`.
    pub fn ola(&mut self, x: &[f64], h: &[f64], fft_size: usize) -> Result<Vec<f64>> {
        self.ola_with_stats(x, h, fft_size).map(|(y, _)| y)
    }

    pub fn ola_with_stats(
        &mut self,
        x: &[f64],
        h: &[f64],
        fft_size: usize,
    ) -> Result<(Vec<f64>, OlaStats)> {
        check_nonempty(x, h)?;
        let block_len = ola_block_len(fft_size, h.len())?;
        let fft = self.prepare(fft_size)?;
        let out_len = x.len() + h.len() - 1;
        let mut out = vec![0.0; out_len];
        let mut stats = OlaStats::default();

        self.transform_padded(&fft, h, true);
        stats.kernel_transforms += 1;

        for (b, chunk) in x.chunks(block_len).enumerate() {
            self.transform_padded(&fft, chunk, false);
            stats.block_transforms += 1;
            self.multiply_and_invert(&fft);
            stats.inverse_transforms += 1;
            stats.blocks += 1;

            let start = b * block_len;
            let valid = (chunk.len() + h.len() - 1).min(out_len - start);
            for (acc, &v) in out[start..start + valid].iter_mut().zip(&self.block) {
                *acc += v;
            }
        }
        Ok((out, stats))
    }

    /// Runs the strategy named by `plan`. A missing FFT size means the
    /// strategy's default: the minimum legal size for the single-shot FFT,
    /// the cost-optimal size for overlap-add.
    pub fn apply(&mut self, x: &[f64], h: &[f64], plan: &ConvolutionPlan) -> Result<Vec<f64>> {
        check_nonempty(x, h)?;
        match plan.strategy {
            Strategy::Direct => Ok(direct(x, h)),
            Strategy::FullFft => {
                if let Some(n) = plan.fft_size {
                    let needed = full_fft_size(x.len(), h.len());
                    if n != needed {
                        return Err(Error::Plan(format!(
                            "single-shot FFT for {} output samples needs size {needed}, got {n}",
                            x.len() + h.len() - 1
                        )));
                    }
                }
                self.full_fft(x, h)
            }
            Strategy::OverlapAdd => {
                let n = match plan.fft_size {
                    Some(n) => n,
                    None => best_ola_size(x.len(), h.len())?,
                };
                self.ola(x, h, n)
            }
        }
    }

    /// Convolves with the cheapest plan for this pair of lengths.
    pub fn auto(&mut self, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        check_nonempty(x, h)?;
        let p = plan(&CostInputs::single(x.len(), h.len())?)?;
        self.apply(x, h, &p)
    }
}

/// Cost-optimal overlap-add FFT size for one source and one microphone.
pub fn best_ola_size(signal_len: usize, rir_len: usize) -> Result<usize> {
    let c = CostInputs::single(signal_len, rir_len)?;
    let best = candidate_plans(&c)?
        .into_iter()
        .filter(|p| p.strategy == Strategy::OverlapAdd)
        .min_by(|a, b| a.predicted_cost.total_cmp(&b.predicted_cost))
        .and_then(|p| p.fft_size);
    best.ok_or_else(|| Error::Plan("no overlap-add candidate".into()))
}

fn check_nonempty(x: &[f64], h: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::DegenerateInput("empty input signal".into()));
    }
    if h.is_empty() {
        return Err(Error::DegenerateInput("empty impulse response".into()));
    }
    Ok(())
}

thread_local! {
    static CONVOLVER: RefCell<Convolver> = RefCell::new(Convolver::default());
}

/// Runs `f` with this thread's default-backend [`Convolver`].
pub fn with_thread_convolver<T>(f: impl FnOnce(&mut Convolver) -> T) -> T {
    CONVOLVER.with(|c| f(&mut c.borrow_mut()))
}

fn mono_input<'a>(x: &'a AudioBuffer, h: &Rir) -> Result<&'a [f64]> {
    if x.sample_rate() != h.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: x.sample_rate(),
            actual: h.sample_rate,
        });
    }
    let samples = x.as_mono()?;
    check_nonempty(samples, &h.samples)?;
    Ok(samples)
}

pub fn convolve_direct(x: &AudioBuffer, h: &Rir) -> Result<AudioBuffer> {
    let samples = mono_input(x, h)?;
    Ok(AudioBuffer::mono(direct(samples, &h.samples), x.sample_rate()))
}

pub fn convolve_full_fft(x: &AudioBuffer, h: &Rir) -> Result<AudioBuffer> {
    let samples = mono_input(x, h)?;
    let y = with_thread_convolver(|c| c.full_fft(samples, &h.samples))?;
    Ok(AudioBuffer::mono(y, x.sample_rate()))
}

pub fn convolve_ola(x: &AudioBuffer, h: &Rir, fft_size: usize) -> Result<AudioBuffer> {
    let samples = mono_input(x, h)?;
    let y = with_thread_convolver(|c| c.ola(samples, &h.samples, fft_size))?;
    Ok(AudioBuffer::mono(y, x.sample_rate()))
}
