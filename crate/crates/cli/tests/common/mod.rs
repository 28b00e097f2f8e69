#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomsim_core::audio::write_wav;
use roomsim_core::{AudioBuffer, SampleFormat};

pub fn roomsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roomsim"))
        .args(args)
        .env_remove("ROOMSIM_SEED")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Writes a short mono PCM16 utterance: a few tones plus a little noise.
pub fn write_utterance(path: &Path, len: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = rng.random_range(100.0..300.0);
    let samples = (0..len)
        .map(|n| {
            let t = n as f64 / 16_000.0;
            0.3 * (2.0 * std::f64::consts::PI * f0 * t).sin()
                + 0.1 * (2.0 * std::f64::consts::PI * 2.7 * f0 * t).sin()
                + 0.01 * rng.random_range(-1.0..1.0)
        })
        .collect();
    write_wav(&AudioBuffer::mono(samples, 16_000), path, SampleFormat::Pcm16).unwrap();
}

/// Small sampled rooms keep the image count and RIR lengths modest.
pub fn write_config(path: &Path, seed: u64) {
    let cfg = serde_json::json!({
        "room": {
            "dimensions": [6.5, 5.0, 3.0],
            "reflection_coefficient": 0.7,
            "image_order": 4
        },
        "sampler": {
            "dimension_ranges": [[3.0, 6.0], [3.0, 5.0], [2.5, 3.0]],
            "seed": seed
        }
    });
    std::fs::write(path, cfg.to_string()).unwrap();
}

/// Manifest with `count` utterances under `dir`; returns the output paths.
pub fn write_batch(dir: &Path, count: usize, out_dir: &str) -> (PathBuf, Vec<PathBuf>) {
    let mut lines = vec![serde_json::json!({"config": "config.json", "epoch": 3}).to_string()];
    let mut outputs = Vec::new();
    for i in 0..count {
        let input = format!("in/utt{i:02}.wav");
        let input_path = dir.join(&input);
        if !input_path.exists() {
            std::fs::create_dir_all(input_path.parent().unwrap()).unwrap();
            write_utterance(&input_path, 4000 + 97 * i, i as u64);
        }
        let output = format!("{out_dir}/utt{i:02}.wav");
        outputs.push(dir.join(&output));
        lines.push(
            serde_json::json!({"utterance_id": format!("utt{i:02}"), "input": input, "output": output})
                .to_string(),
        );
    }
    let manifest = dir.join(format!("{out_dir}.jsonl"));
    std::fs::write(&manifest, lines.join("\n")).unwrap();
    (manifest, outputs)
}
