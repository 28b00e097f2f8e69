use std::io::Write;

use roomsim_core::audio::write_wav;
use roomsim_core::room_model::{
    cutoff_index, power_threshold, synthesize_rir, truncate_rir, Placement,
};
use roomsim_core::sampler::sample_scene;
use roomsim_core::{AudioBuffer, SimConfig};
use serde::Serialize;

use super::{emit, emit_json};
use crate::args::RirArgs;
use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
struct RirSummary {
    output: String,
    length_samples: usize,
    length_secs: f64,
    sample_rate: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    untruncated_length: Option<usize>,
}

pub fn run(args: &RirArgs, out: &mut impl Write) -> Result<()> {
    let config = SimConfig::load(&args.config)?;
    let (room, source, mic) = match (args.source, args.mic) {
        (Some(s), Some(m)) => (
            config.room.clone(),
            Placement { position: s },
            Placement { position: m },
        ),
        (None, None) => {
            let mut sampler = config.sampler.clone();
            if let Some(seed) = args.seed {
                sampler.seed = seed;
            }
            let scene = sample_scene(&sampler, &config.room, &args.utterance_id, args.epoch)?;
            (scene.room, scene.target, scene.mics[0])
        }
        _ => return Err(CliError::Usage("--source and --mic go together".into())),
    };

    let full = synthesize_rir(&room, &source, &mic)?;
    let (rir, cutoff) = match args.eta_db {
        Some(eta) => {
            let n_c = cutoff_index(&full, power_threshold(&full, eta)?);
            (truncate_rir(&full, eta)?, Some(n_c))
        }
        None => (full.clone(), None),
    };

    let is_json = args
        .output
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let text = serde_json::to_string(&rir.samples).expect("finite samples");
        std::fs::write(&args.output, text)
            .map_err(|e| CliError::io(format!("writing {}", args.output.display()), e))?;
    } else {
        let buf = AudioBuffer::mono(rir.samples.clone(), rir.sample_rate);
        write_wav(&buf, &args.output, args.format.into())?;
    }

    let summary = RirSummary {
        output: args.output.display().to_string(),
        length_samples: rir.len(),
        length_secs: rir.duration_secs(),
        sample_rate: rir.sample_rate,
        eta_db: args.eta_db,
        cutoff_index: cutoff,
        untruncated_length: args.eta_db.map(|_| full.len()),
    };
    if args.json {
        return emit_json(out, &summary);
    }
    emit(
        out,
        format!(
            "length: {} samples ({:.4} s at {} Hz)",
            summary.length_samples, summary.length_secs, summary.sample_rate
        ),
    )?;
    if let (Some(eta), Some(n_c)) = (args.eta_db, cutoff) {
        emit(
            out,
            format!("cutoff index n_c: {n_c} (eta {eta} dB, untruncated {} samples)", full.len()),
        )?;
    }
    Ok(())
}
