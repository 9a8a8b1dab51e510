mod common;

use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use soda::frames::*;
use soda::impairments::{apply_awgn, apply_frequency_offset};
use soda::iqfile::*;
use soda::phy::*;

fn random_frame(rng: &mut ChaCha8Rng) -> RawFrame {
    encode_frame(
        Capability::new(rng.random_range(0..8)).unwrap(),
        IcaoAddress::new(rng.random_range(0..=IcaoAddress::MAX)).unwrap(),
        MePayload::new(rng.random_range(0..1u64 << 56)).unwrap(),
    )
}

#[test]
fn ten_thousand_frames_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let f = random_frame(&mut rng);
        let cap = modulate(&f, DEFAULT_SAMPLE_RATE, 0.8).unwrap();
        assert_eq!(cap.samples.len(), 240);
        let back = demodulate(&cap).unwrap();
        assert_eq!(back, f);
        decode_frame(&back).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn higher_rates_scale_length() {
    let f = random_frame(&mut ChaCha8Rng::seed_from_u64(2));
    for k in [1usize, 2, 4] {
        let cap = modulate(&f, 2e6 * k as f64, 1.0).unwrap();
        assert_eq!(cap.samples.len(), 240 * k);
        assert_eq!(demodulate(&cap).unwrap(), f);
    }
    assert!(matches!(
        modulate(&f, 3e6, 1.0),
        Err(PhyError::SampleRate(_))
    ));
}

#[test]
fn frame_error_rate_at_20_db() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut errors = 0;
    for _ in 0..10_000 {
        let f = random_frame(&mut rng);
        let cap = apply_awgn(
            &modulate(&f, DEFAULT_SAMPLE_RATE, 0.5).unwrap(),
            20.0,
            &mut rng,
        )
        .unwrap();
        if demodulate(&cap).unwrap() != f {
            errors += 1;
        }
    }
    assert!(errors < 10, "{errors} frame errors");
}

#[test]
fn zero_amplitude_is_undetectable() {
    let f = random_frame(&mut ChaCha8Rng::seed_from_u64(4));
    let cap = modulate(&f, DEFAULT_SAMPLE_RATE, 0.0).unwrap();
    assert!(cap.samples.iter().all(|s| *s == Complex64::new(0.0, 0.0)));
    assert!(detect_preamble(&cap.samples, DEFAULT_SAMPLE_RATE, 6.0)
        .unwrap()
        .is_empty());
}

#[test]
fn noise_alone_rarely_triggers() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut false_hits = 0;
    for _ in 0..1000 {
        let stream: Vec<Complex64> = (0..480)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * 0.01
            })
            .collect();
        if !detect_preamble(&stream, DEFAULT_SAMPLE_RATE, DEFAULT_DETECTION_THRESHOLD_DB)
            .unwrap()
            .is_empty()
        {
            false_hits += 1;
        }
    }
    assert!(false_hits <= 10, "{false_hits} noise-only detections");
}

#[test]
fn finds_messages_in_a_noisy_stream() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let offsets = [150usize, 600, 840, 1500];
    let mut stream = vec![Complex64::new(0.0, 0.0); 2000];
    for &o in &offsets {
        let cap = modulate(&random_frame(&mut rng), DEFAULT_SAMPLE_RATE, 0.5).unwrap();
        for (k, s) in cap.samples.iter().enumerate() {
            stream[o + k] += s;
        }
    }
    let noisy = IqCapture {
        samples: stream,
        ..modulate(&random_frame(&mut rng), DEFAULT_SAMPLE_RATE, 0.5).unwrap()
    };
    let noisy = apply_awgn(&noisy, 25.0, &mut rng).unwrap();
    assert_eq!(
        detect_preamble(&noisy.samples, DEFAULT_SAMPLE_RATE, 6.0).unwrap(),
        offsets
    );
}

#[test]
fn iq_file_and_manifest_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let caps: Vec<IqCapture> = (0..5)
        .map(|i| {
            let mut c = modulate(&random_frame(&mut rng), DEFAULT_SAMPLE_RATE, 0.9).unwrap();
            c.label = Label::ALL[i % 4];
            c.timestamp = i as f64;
            c
        })
        .collect();
    let mut bytes = Vec::new();
    let records = write_iq_file(&caps, &mut bytes).unwrap();
    let mut manifest = Vec::new();
    write_manifest(&records, &mut manifest).unwrap();
    let back = read_captures(&bytes, &read_manifest(&manifest[..]).unwrap()).unwrap();
    for (a, b) in caps.iter().zip(&back) {
        assert_eq!(
            (a.label, a.claimed_icao, a.timestamp),
            (b.label, b.claimed_icao, b.timestamp)
        );
        assert_eq!(demodulate(a).unwrap(), demodulate(b).unwrap());
    }
    assert!(read_captures(&bytes[..bytes.len() - 2], &records).is_err());
}

proptest! {
    #[test]
    fn demod_ignores_rotation_and_gain(seed in any::<u64>(), theta in -3.2f64..3.2, gain in 0.01f64..10.0, df in -10_000.0f64..10_000.0) {
        let f = random_frame(&mut ChaCha8Rng::seed_from_u64(seed));
        let cap = modulate(&f, DEFAULT_SAMPLE_RATE, 0.5).unwrap();
        let rotated = apply_frequency_offset(&cap, df, theta).scaled(gain);
        prop_assert_eq!(demodulate(&rotated).unwrap(), f);
    }
}
