use std::io::Write;
use std::path::PathBuf;

use roomsim_core::audio::read_wav;
use serde::Serialize;

use super::{emit, emit_json};
use crate::args::AugmentArgs;
use crate::error::Result;
use crate::pipeline::{write_outputs, Augmenter, OutputOptions};

#[derive(Debug, Serialize)]
struct AugmentSummary {
    utterance_id: String,
    epoch: u64,
    outputs: Vec<PathBuf>,
    channels: usize,
    samples: usize,
    gains: Vec<Vec<f64>>,
    saturated: usize,
}

pub fn run(args: &AugmentArgs, out: &mut impl Write) -> Result<()> {
    let augmenter = Augmenter::from_args(&args.render, None)?;
    let input = read_wav(&args.input)?;
    let utterance_id = args.utterance_id.clone().unwrap_or_else(|| {
        args.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let mix = augmenter.augment(&utterance_id, args.epoch, &input)?;

    let mut base = args.output_prefix.clone().into_os_string();
    base.push(".wav");
    let channels = mix.channels.channel_count();
    let samples = mix.channels.len();
    let (outputs, saturated) = write_outputs(
        mix.channels,
        &PathBuf::from(base),
        &OutputOptions::from_args(&args.render),
    )?;

    let summary = AugmentSummary {
        utterance_id,
        epoch: args.epoch,
        outputs,
        channels,
        samples,
        gains: mix.gains,
        saturated,
    };
    if args.json {
        return emit_json(out, &summary);
    }
    for p in &summary.outputs {
        emit(out, format!("wrote {}", p.display()))?;
    }
    emit(
        out,
        format!(
            "{} channels x {} samples, {} sources",
            summary.channels,
            summary.samples,
            summary.gains.len()
        ),
    )?;
    if saturated > 0 {
        emit(out, format!("warning: {saturated} samples saturated"))?;
    }
    Ok(())
}
