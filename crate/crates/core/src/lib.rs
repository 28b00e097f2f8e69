//! Room acoustics simulation for speech training-data augmentation.
//!
//! The crate is organised bottom-up:
//!
//! * [`room_model`] synthesizes room impulse responses with the image method
//!   and trims their tails by a power threshold.
//! * [`sampler`] draws reproducible random rooms and scenes per
//!   `(seed, utterance, epoch)`.
//! * [`convolution`] implements direct, single-FFT and overlap-add filtering
//!   together with closed-form multiplication-count models and an FFT-size
//!   planner.
//! * [`mixer`] renders the multi-source, multi-microphone received signals.
//! * [`audio`] reads and writes WAV files, JSON configs and manifests.

pub mod audio;
pub mod convolution;
pub mod error;
pub mod mixer;
pub mod room_model;
pub mod sampler;

pub use audio::{AudioBuffer, Manifest, ManifestRecord, SampleFormat, SimConfig};
pub use convolution::{
    convolve_direct, convolve_full_fft, convolve_ola, cost_direct, cost_full_fft, cost_ola,
    plan, ConvolutionPlan, Convolver, CostInputs, FftBackend, Strategy,
};
pub use error::{Error, Result};
pub use mixer::{compute_gain, render, MixOutput, NoiseTerm, PlanHint, Scene, SourceTerm};
pub use room_model::{
    cutoff_index, enumerate_images, power_threshold, synthesize_rir, truncate_rir, ImageSource,
    Placement, RoomConfig, Rir,
};
pub use sampler::{sample_scene, SampledScene, SamplerSpec};
