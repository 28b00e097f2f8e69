use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomsim_core::convolution::{direct, Strategy};
use roomsim_core::mixer::{
    compute_gain, measure_snr_db, render, render_with_gains, PlanHint, Scene, SourceTerm,
};
use roomsim_core::{AudioBuffer, Rir};

const FS: u32 = 16_000;

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_source(rng: &mut ChaCha8Rng, mics: usize) -> SourceTerm {
    let nx = rng.random_range(50..1500);
    SourceTerm {
        signal: AudioBuffer::mono(random_vec(rng, nx), FS),
        rirs: (0..mics)
            .map(|_| {
                let nh = rng.random_range(1..200);
                Rir::new(random_vec(rng, nh), FS)
            })
            .collect(),
    }
}

fn random_scene(rng: &mut ChaCha8Rng) -> Scene {
    let mics = rng.random_range(1..=3);
    let mut scene = Scene::new(random_source(rng, mics), mics);
    for _ in 0..rng.random_range(0..=3) {
        let snr = rng.random_range(-10.0..30.0);
        scene = scene.with_noise(random_source(rng, mics), snr);
    }
    scene
}

#[test]
fn gain_re_measurement() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let t = random_vec(&mut rng, 400);
        let n: Vec<f64> = random_vec(&mut rng, 300).iter().map(|v| v * 3.0).collect();
        let snr = rng.random_range(-20.0..40.0);
        let g = compute_gain(
            &AudioBuffer::mono(t.clone(), FS),
            &AudioBuffer::mono(n.clone(), FS),
            snr,
        )
        .unwrap();
        let scaled: Vec<f64> = n.iter().map(|v| v * g).collect();
        assert!((measure_snr_db(&t, &scaled) - snr).abs() < 1e-9);
    }
}

#[test]
fn achieved_snr_per_mic() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let scene = random_scene(&mut rng);
        let out = render(&scene, None).unwrap();
        assert_eq!(out.channels.channel_count(), scene.mic_count);
        for (i, noise) in scene.noises.iter().enumerate() {
            for j in 0..scene.mic_count {
                let t = direct(
                    scene.target.signal.channel(0),
                    &scene.target.rirs[j].samples,
                );
                let n: Vec<f64> = direct(noise.source.signal.channel(0), &noise.source.rirs[j].samples)
                    .into_iter()
                    .map(|v| v * out.gains[i + 1][j])
                    .collect();
                assert!((measure_snr_db(&t, &n) - noise.snr_db).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn output_is_strategy_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        let scene = random_scene(&mut rng);
        let reference = render(&scene, Some(PlanHint::strategy(Strategy::Direct))).unwrap();
        let peak = 1.0 + reference.channels.peak();
        for strategy in [Strategy::FullFft, Strategy::OverlapAdd] {
            let out = render(&scene, Some(PlanHint::strategy(strategy))).unwrap();
            assert_eq!(out.channels.len(), reference.channels.len());
            for (a, b) in out
                .channels
                .channels()
                .iter()
                .flatten()
                .zip(reference.channels.channels().iter().flatten())
            {
                assert!((a - b).abs() <= 1e-9 * peak);
            }
        }
        let auto = render(&scene, None).unwrap();
        for (a, b) in auto.channels.channels().iter().flatten().zip(reference.channels.channels().iter().flatten()) {
            assert!((a - b).abs() <= 1e-9 * peak);
        }
    }
}

#[test]
fn channel_length_is_longest_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..20 {
        let scene = random_scene(&mut rng);
        let expected = std::iter::once(&scene.target)
            .chain(scene.noises.iter().map(|n| &n.source))
            .flat_map(|s| s.rirs.iter().map(move |h| s.signal.len() + h.len() - 1))
            .max()
            .unwrap();
        assert_eq!(render(&scene, None).unwrap().channels.len(), expected);
    }
}

#[test]
fn rendering_is_linear_in_noise_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mics = 2;
    let target = random_source(&mut rng, mics);
    let a = random_source(&mut rng, mics);
    let b = random_source(&mut rng, mics);
    let ga = vec![0.3, 0.7];
    let gb = vec![1.2, 0.05];

    let only_target = Scene::new(target.clone(), mics);
    let with_a = only_target.clone().with_noise(a.clone(), 0.0);
    let with_b = only_target.clone().with_noise(b.clone(), 0.0);
    let with_ab = with_a.clone().with_noise(b, 0.0);

    let t = render_with_gains(&only_target, &vec![vec![1.0; mics]], None).unwrap();
    let ya = render_with_gains(&with_a, &vec![vec![1.0; mics], ga.clone()], None).unwrap();
    let yb = render_with_gains(&with_b, &vec![vec![1.0; mics], gb.clone()], None).unwrap();
    let yab = render_with_gains(&with_ab, &vec![vec![1.0; mics], ga, gb], None).unwrap();

    let len = yab.channels.len();
    let at = |buf: &AudioBuffer, j: usize, n: usize| buf.channel(j).get(n).copied().unwrap_or(0.0);
    for j in 0..mics {
        for n in 0..len {
            let sum = at(&ya.channels, j, n) + at(&yb.channels, j, n) - at(&t.channels, j, n);
            assert!((sum - at(&yab.channels, j, n)).abs() < 1e-9);
        }
    }
}
