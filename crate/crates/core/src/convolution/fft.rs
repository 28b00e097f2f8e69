//! Real-input FFTs of power-of-two size.
//!
//! A length-`N` real transform runs as one complex transform of length `N/2`
//! over the even/odd-interleaved input, followed by a split step that
//! recovers bins `0..=N/2`. The remaining bins follow from Hermitian symmetry
//! and are never stored. The complex kernel is pluggable: [`FftBackend`]
//! selects between the self-contained radix-2 implementation below and
//! `rustfft`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex FFT engine used under the real-input transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FftBackend {
    /// Iterative radix-2 decimation-in-time, written in this crate.
    Radix2,
    /// The `rustfft` planner.
    #[default]
    RustFft,
}

impl fmt::Display for FftBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Radix2 => "radix2",
            Self::RustFft => "rustfft",
        })
    }
}

impl FromStr for FftBackend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "radix2" => Ok(Self::Radix2),
            "rustfft" => Ok(Self::RustFft),
            other => Err(format!("unknown FFT backend '{other}'")),
        }
    }
}

trait ComplexKernel: Send + Sync {
    fn scratch_len(&self) -> usize;
    fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]);
    /// Unnormalized inverse.
    fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]);
}

struct Radix2Kernel {
    len: usize,
    /// `exp(-2 pi i j / len)` for `j < len / 2`.
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<u32>,
}

impl Radix2Kernel {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let bits = len.trailing_zeros();
        let bit_reverse = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / len as f64))
            .collect();
        Self {
            len,
            twiddles,
            bit_reverse,
        }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            let j = j as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for block in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let w = self.twiddles[j * stride];
                    let w = if inverse { w.conj() } else { w };
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }
}

impl ComplexKernel for Radix2Kernel {
    fn scratch_len(&self) -> usize {
        0
    }

    fn forward(&self, buf: &mut [Complex64], _scratch: &mut [Complex64]) {
        self.transform(buf, false);
    }

    fn inverse(&self, buf: &mut [Complex64], _scratch: &mut [Complex64]) {
        self.transform(buf, true);
    }
}

struct RustFftKernel {
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
}

impl RustFftKernel {
    fn new(len: usize) -> Self {
        let mut planner = rustfft::FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }
}

impl ComplexKernel for RustFftKernel {
    fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let len = self.forward.get_inplace_scratch_len();
        self.forward.process_with_scratch(buf, &mut scratch[..len]);
    }

    fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let len = self.inverse.get_inplace_scratch_len();
        self.inverse.process_with_scratch(buf, &mut scratch[..len]);
    }
}

/// A planned real-input transform of size `N`.
///
/// Plans are immutable and can be shared between threads; callers bring
/// their own scratch.
pub struct RealFft {
    len: usize,
    backend: FftBackend,
    kernel: Box<dyn ComplexKernel>,
    /// `exp(-2 pi i k / N)` for `k < N / 2`.
    split_twiddles: Vec<Complex64>,
}

impl fmt::Debug for RealFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFft")
            .field("len", &self.len)
            .field("backend", &self.backend)
            .finish()
    }
}

impl RealFft {
    pub fn new(len: usize, backend: FftBackend) -> Result<Self> {
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Plan(format!(
                "FFT size must be a power of two >= 2, got {len}"
            )));
        }
        let half = len / 2;
        let kernel: Box<dyn ComplexKernel> = match backend {
            FftBackend::Radix2 => Box::new(Radix2Kernel::new(half)),
            FftBackend::RustFft => Box::new(RustFftKernel::new(half)),
        };
        let split_twiddles = (0..half)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Ok(Self {
            len,
            backend,
            kernel,
            split_twiddles,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn backend(&self) -> FftBackend {
        self.backend
    }

    /// Number of stored spectrum bins, `N/2 + 1`.
    pub fn spectrum_len(&self) -> usize {
        self.len / 2 + 1
    }

    pub fn scratch_len(&self) -> usize {
        self.len / 2 + self.kernel.scratch_len()
    }

    /// Forward transform of `input` (length `N`) into bins `0..=N/2`.
    pub fn forward(&self, input: &[f64], output: &mut [Complex64], scratch: &mut [Complex64]) {
        let half = self.len / 2;
        assert_eq!(input.len(), self.len);
        assert_eq!(output.len(), half + 1);
        assert!(scratch.len() >= self.scratch_len());

        for (z, pair) in output[..half].iter_mut().zip(input.chunks_exact(2)) {
            *z = Complex64::new(pair[0], pair[1]);
        }
        self.kernel.forward(&mut output[..half], scratch);

        let z0 = output[0];
        output[0] = Complex64::new(z0.re + z0.im, 0.0);
        output[half] = Complex64::new(z0.re - z0.im, 0.0);
        let neg_half_i = Complex64::new(0.0, -0.5);
        for k in 1..=half / 2 {
            let j = half - k;
            let zk = output[k];
            let zj = output[j];
            let even = (zk + zj.conj()) * 0.5;
            let odd = (zk - zj.conj()) * neg_half_i;
            output[k] = even + self.split_twiddles[k] * odd;
            if j != k {
                output[j] = even.conj() + self.split_twiddles[j] * odd.conj();
            }
        }
    }

    /// Inverse transform from bins `0..=N/2` to `N` real samples, including
    /// the `1/N` normalization.
    pub fn inverse(&self, input: &[Complex64], output: &mut [f64], scratch: &mut [Complex64]) {
        let half = self.len / 2;
        assert_eq!(input.len(), half + 1);
        assert_eq!(output.len(), self.len);
        assert!(scratch.len() >= self.scratch_len());

        let (work, kernel_scratch) = scratch.split_at_mut(half);
        let scale = 1.0 / self.len as f64;
        let i = Complex64::new(0.0, 1.0);
        for k in 0..half {
            let xk = input[k];
            let xj = input[half - k].conj();
            let even = xk + xj;
            let odd = (xk - xj) * self.split_twiddles[k].conj();
            work[k] = (even + i * odd) * scale;
        }
        self.kernel.inverse(work, kernel_scratch);
        for (pair, z) in output.chunks_exact_mut(2).zip(work.iter()) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
    }
}
