use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use roomsim_core::audio::read_wav;
use roomsim_core::Manifest;
use serde::Serialize;

use super::{emit, emit_json};
use crate::args::BatchArgs;
use crate::error::{CliError, Result};
use crate::pipeline::{write_outputs, Augmenter, OutputOptions};

#[derive(Debug, Serialize)]
pub struct BatchFailure {
    pub utterance_id: String,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct BatchSummary {
    pub processed: usize,
    pub failed: usize,
    pub epoch: u64,
    pub parallelism: u32,
    pub wall_secs: f64,
    pub mean_ms_per_utterance: f64,
    pub failures: Vec<BatchFailure>,
}

pub fn run(args: &BatchArgs, out: &mut impl Write) -> Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let augmenter = Augmenter::from_args(&args.render, manifest.config.as_deref())?;
    let epoch = args.epoch.or(manifest.epoch).unwrap_or(0);
    let opts = OutputOptions::from_args(&args.render);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.parallelism as usize)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;

    let start = Instant::now();
    let results: Vec<_> = pool.install(|| {
        manifest
            .records
            .par_iter()
            .map(|rec| {
                let t = Instant::now();
                let outcome = read_wav(&rec.input)
                    .map_err(CliError::from)
                    .and_then(|x| augmenter.augment(&rec.utterance_id, epoch, &x))
                    .and_then(|mix| write_outputs(mix.channels, &rec.output, &opts));
                (rec, outcome, t.elapsed())
            })
            .collect()
    });
    let wall = start.elapsed();

    let mut failures = Vec::new();
    let mut busy = 0.0;
    let mut processed = 0;
    for (rec, outcome, elapsed) in results {
        match outcome {
            Ok(_) => {
                processed += 1;
                busy += elapsed.as_secs_f64();
            }
            Err(e) => {
                log::error!("{}: {e}", rec.utterance_id);
                failures.push(BatchFailure {
                    utterance_id: rec.utterance_id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }

    let summary = BatchSummary {
        processed,
        failed: failures.len(),
        epoch,
        parallelism: args.parallelism,
        wall_secs: wall.as_secs_f64(),
        mean_ms_per_utterance: if processed > 0 {
            busy * 1e3 / processed as f64
        } else {
            0.0
        },
        failures,
    };
    if args.json {
        emit_json(out, &summary)?;
    } else {
        for f in &summary.failures {
            emit(out, format!("FAILED {}: {}", f.utterance_id, f.error))?;
        }
        emit(
            out,
            format!(
                "processed {} utterances, {} failed, wall {:.3} s, mean {:.2} ms/utterance",
                summary.processed, summary.failed, summary.wall_secs, summary.mean_ms_per_utterance
            ),
        )?;
    }
    if summary.failed > 0 {
        return Err(CliError::BatchFailed {
            failed: summary.failed,
            total: manifest.records.len(),
        });
    }
    Ok(())
}
