mod common;

use common::*;
use roomsim_core::audio::read_wav;
use roomsim_core::room_model::{cutoff_index, power_threshold, synthesize_rir};
use roomsim_core::{Placement, RoomConfig};

#[test]
fn rir_zeroth_order_tap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("room.json");
    std::fs::write(
        &cfg,
        r#"{"room": {"dimensions": [5, 4, 3], "reflection_coefficient": 0.5, "image_order": 0}}"#,
    )
    .unwrap();
    let out = dir.path().join("h.json");
    let o = roomsim(&[
        "rir", "--config", path_str(&cfg), "--source", "1,1,1", "--mic", "2,1,1", "-o", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let h: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(h.len(), 48);
    assert_eq!(h[47], 1.0);
    assert!(h[..47].iter().all(|&v| v == 0.0));
    assert!(stdout(&o).contains("length: 48 samples"));
}

#[test]
fn rir_cutoff_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("room.json");
    std::fs::write(&cfg, r#"{"room": {"dimensions": [6.5, 5, 3], "reflection_coefficient": 0.8}}"#)
        .unwrap();
    let out = dir.path().join("h.json");
    let o = roomsim(&[
        "rir", "--config", path_str(&cfg), "--source", "2,1.5,1.2", "--mic", "4,3,1.5",
        "--eta-db", "20", "-o", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let printed: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("cutoff index n_c: "))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();

    let room = RoomConfig::new([6.5, 5.0, 3.0], 0.8);
    let full = synthesize_rir(&room, &Placement::new(2.0, 1.5, 1.2), &Placement::new(4.0, 3.0, 1.5))
        .unwrap();
    let n_c = cutoff_index(&full, power_threshold(&full, 20.0).unwrap());
    assert_eq!(printed, n_c);
    let h: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(h.len(), (n_c + 2).min(full.len()));
    assert_eq!(h[..], full.samples[..h.len()]);
}

#[test]
fn rir_from_seed_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    write_config(&cfg, 1);
    let a = dir.path().join("a.wav");
    let b = dir.path().join("b.wav");
    for out in [&a, &b] {
        let o = roomsim(&["rir", "--config", path_str(&cfg), "--seed", "9", "-o", path_str(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let h = read_wav(&a).unwrap();
    assert!(h.peak() > 0.0);
}

#[test]
fn malformed_config_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let out = dir.path().join("h.wav");
    let o = roomsim(&[
        "rir", "--config", path_str(&cfg), "--source", "1,1,1", "--mic", "2,1,1", "-o", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    assert!(!out.exists());

    std::fs::write(&cfg, r#"{"room": {"dimensions": [5, 4, 3], "reflection_coefficient": 1.5}}"#)
        .unwrap();
    let o = roomsim(&[
        "rir", "--config", path_str(&cfg), "--source", "1,1,1", "--mic", "2,1,1", "-o", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn source_outside_room_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("room.json");
    std::fs::write(&cfg, r#"{"room": {"dimensions": [5, 4, 3], "reflection_coefficient": 0.5}}"#)
        .unwrap();
    let out = dir.path().join("h.wav");
    let o = roomsim(&[
        "rir", "--config", path_str(&cfg), "--source", "6,1,1", "--mic", "2,1,1", "-o", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_two() {
    let o = roomsim(&["rir", "--config", "x.json", "--source", "1,1,1", "-o", "h.wav"]);
    assert_eq!(o.status.code(), Some(2));
    let o = roomsim(&["cost", "1", "0", "100", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = roomsim(&["augment", "-i", "x.wav", "-o", "y", "--fft-size", "512"]);
    assert_eq!(o.status.code(), Some(2));
}

fn augment(dir: &std::path::Path, prefix: &str, extra: &[&str]) -> Vec<u8> {
    let cfg = dir.join("config.json");
    let input = dir.join("speech.wav");
    if !input.exists() {
        write_config(&cfg, 0);
        write_utterance(&input, 8000, 1);
    }
    let out = dir.join(prefix);
    let mut args = vec![
        "augment", "-i", path_str(&input), "-o", path_str(&out), "--config", path_str(&cfg),
    ];
    args.extend_from_slice(extra);
    let o = roomsim(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::read(dir.join(format!("{prefix}.wav"))).unwrap()
}

#[test]
fn augment_is_deterministic_per_seed_and_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let a = augment(dir.path(), "a", &["--seed", "42", "--epoch", "1"]);
    let b = augment(dir.path(), "b", &["--seed", "42", "--epoch", "1"]);
    assert_eq!(a, b);
    let c = augment(dir.path(), "c", &["--seed", "42", "--epoch", "2"]);
    assert_ne!(a, c);
    let d = augment(dir.path(), "d", &["--seed", "43", "--epoch", "1"]);
    assert_ne!(a, d);
}

#[test]
fn augment_strategies_agree() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--seed", "7", "--format", "float32"];
    let mut runs = Vec::new();
    for (name, strategy) in [("direct", "direct"), ("fft", "fft"), ("ola", "ola"), ("auto", "auto")] {
        let mut args = common.to_vec();
        args.extend_from_slice(&["--strategy", strategy]);
        augment(dir.path(), name, &args);
        runs.push(read_wav(dir.path().join(format!("{name}.wav"))).unwrap());
    }
    let reference = &runs[0];
    let tol = 1e-6 * (1.0 + reference.peak());
    for other in &runs[1..] {
        assert_eq!(other.channel_count(), reference.channel_count());
        assert_eq!(other.len(), reference.len());
        for (a, b) in reference.channels().iter().zip(other.channels()) {
            let err = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err <= tol, "max error {err}");
        }
    }
}

#[test]
fn augment_per_channel_and_normalize() {
    let dir = tempfile::tempdir().unwrap();
    augment(dir.path(), "whole", &["--seed", "5", "--normalize", "--format", "float32"]);
    let whole = read_wav(dir.path().join("whole.wav")).unwrap();
    assert!((whole.peak() - 32767.0 / 32768.0).abs() < 1e-6);

    let cfg = dir.path().join("config.json");
    let input = dir.path().join("speech.wav");
    let out = dir.path().join("split");
    let o = roomsim(&[
        "augment", "-i", path_str(&input), "-o", path_str(&out), "--config", path_str(&cfg),
        "--seed", "5", "--per-channel", "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["utterance_id"], "speech");
    let outputs = summary["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), whole.channel_count());
    for j in 0..whole.channel_count() {
        let ch = read_wav(dir.path().join(format!("split.ch{j}.wav"))).unwrap();
        assert_eq!(ch.channel_count(), 1);
        assert_eq!(ch.len(), whole.len());
    }
}

#[test]
fn augment_with_noise_pool() {
    let dir = tempfile::tempdir().unwrap();
    let noise = dir.path().join("babble.wav");
    write_utterance(&noise, 3000, 99);
    let a = augment(dir.path(), "a", &["--seed", "1", "--noise", path_str(&noise)]);
    let b = augment(dir.path(), "b", &["--seed", "1", "--noise", path_str(&noise)]);
    let white = augment(dir.path(), "w", &["--seed", "1"]);
    assert_eq!(a, b);
    assert_ne!(a, white);
}

#[test]
fn batch_is_independent_of_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    write_config(&dir.path().join("config.json"), 11);
    let (m1, out1) = write_batch(dir.path(), 20, "serial");
    let (m8, out8) = write_batch(dir.path(), 20, "parallel");
    let o = roomsim(&["batch", "-m", path_str(&m1), "--parallelism", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("processed 20 utterances, 0 failed"));
    let o = roomsim(&["batch", "-m", path_str(&m8), "--parallelism", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for (a, b) in out1.iter().zip(&out8) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{}", a.display());
    }
    let first = std::fs::read(&out1[0]).unwrap();
    let second = std::fs::read(&out1[1]).unwrap();
    assert_ne!(first, second);
}

#[test]
fn batch_epoch_flag_overrides_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_config(&dir.path().join("config.json"), 11);
    let (m, out) = write_batch(dir.path(), 2, "e");
    assert!(roomsim(&["batch", "-m", path_str(&m)]).status.success());
    let header_epoch = std::fs::read(&out[0]).unwrap();
    assert!(roomsim(&["batch", "-m", path_str(&m), "--epoch", "3"]).status.success());
    assert_eq!(std::fs::read(&out[0]).unwrap(), header_epoch);
    let o = roomsim(&["batch", "-m", path_str(&m), "--epoch", "4", "--json"]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["epoch"], 4);
    assert_ne!(std::fs::read(&out[0]).unwrap(), header_epoch);
}

#[test]
fn empty_manifest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("empty.jsonl");
    std::fs::write(&m, "").unwrap();
    let o = roomsim(&["batch", "-m", path_str(&m)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("processed 0 utterances, 0 failed"));
}

#[test]
fn batch_reports_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    write_config(&dir.path().join("config.json"), 2);
    let (m, outputs) = write_batch(dir.path(), 5, "out");
    std::fs::write(dir.path().join("in/utt02.wav"), b"not a wav file").unwrap();
    let o = roomsim(&["batch", "-m", path_str(&m), "--parallelism", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAILED utt02:"), "{text}");
    assert!(text.contains("processed 4 utterances, 1 failed"), "{text}");
    for (i, p) in outputs.iter().enumerate() {
        assert_eq!(p.exists(), i != 2);
    }
}

#[test]
fn duplicate_ids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("dup.jsonl");
    std::fs::write(
        &m,
        "{\"utterance_id\":\"a\",\"input\":\"x.wav\",\"output\":\"y.wav\"}\n\
         {\"utterance_id\":\"a\",\"input\":\"z.wav\",\"output\":\"w.wav\"}\n",
    )
    .unwrap();
    let o = roomsim(&["batch", "-m", path_str(&m)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cost_table_and_json() {
    let o = roomsim(&["cost", "2.55", "2", "116991", "3893"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("C_td  = 2.322774e9"), "{text}");
    assert!(text.contains("C_FFT = 6.952059e7"), "{text}");
    assert!(text.contains("5.080351e7 *"), "{text}");
    assert!(text.contains("best: overlap_add at N = 16384"), "{text}");
    assert_eq!(text.matches(" *").count(), 1);

    let o = roomsim(&["cost", "2.55", "2", "116991", "3893", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["best"]["strategy"], "overlap_add");
    assert_eq!(v["best"]["fft_size"], 16384);
    let rows = v["ola"].as_array().unwrap();
    let min = rows
        .iter()
        .map(|r| r["cost"].as_f64().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(v["best"]["predicted_cost"].as_f64().unwrap(), min);
    assert!(v["full_fft"].as_f64().unwrap() > min);
}

#[test]
fn bench_small_json() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("bench.json");
    let o = roomsim(&[
        "bench", "--trials", "5", "--signal-len", "4000", "--rir-len", "300", "--eta-list",
        "none,20", "--include-direct", "--json", "--report", path_str(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 6);
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["signal_len"], 4000);
    assert_eq!(roomsim(&["bench", "--eta-list", "abc"]).status.code(), Some(2));
}
