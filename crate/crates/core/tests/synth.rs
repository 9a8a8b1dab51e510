use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soda::frames::{decode_frame, IcaoAddress};
use soda::phy::{demodulate, Label};
use soda::synth::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn trajectory(icao: u32) -> Trajectory {
    let station = ChannelParams::default().station;
    let mut t = Trajectory::sample(IcaoAddress::new(icao).unwrap(), &station, &mut rng(0));
    t.icao = IcaoAddress::new(icao).unwrap();
    t
}

fn spoofer(cfo: f64, gains: Vec<f64>) -> SpooferProfile {
    SpooferProfile {
        radio: TransponderProfile {
            cfo_mean: cfo,
            cfo_jitter_sigma: 0.0,
            phase_offset: PhaseOffset::Fixed(0.0),
            amplitude: 0.5,
            amplitude_jitter_sigma: 0.0,
            carrier_leakage: 0.0,
        },
        doppler_mode: DopplerMode::None,
        cfo_mode: CfoMode::None,
        gains,
    }
}

/// Average phase advance per sample, measured across consecutive pulse samples.
fn pulse_phase_slope(samples: &[num_complex::Complex64]) -> f64 {
    let peak = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let on: Vec<usize> = (0..samples.len())
        .filter(|&k| samples[k].norm() > 0.5 * peak)
        .collect();
    let (mut sum, mut span) = (0.0, 0.0);
    for w in on.windows(2) {
        sum += (samples[w[1]] * samples[w[0]].conj()).arg();
        span += (w[1] - w[0]) as f64;
    }
    sum / span
}

#[test]
fn single_aircraft_ten_seconds() {
    let fleet = [FleetMember {
        profile: TransponderProfile::transponder(1000.0, 100.0),
        trajectory: trajectory(0xABC123),
    }];
    let caps = synth_authentic(&fleet, 10.0, &ChannelParams::default(), &mut rng(1)).unwrap();
    assert_eq!(caps.len(), 10);
    for c in &caps {
        let f = decode_frame(&demodulate(c).unwrap()).unwrap();
        assert_eq!(f.icao, c.claimed_icao);
        assert_eq!(c.truth_icao, Some(c.claimed_icao));
        assert_eq!(c.label, Label::A0);
    }
}

#[test]
fn cfo_separates_phase_slopes() {
    let fleet: Vec<FleetMember> = [(1u32, 0.0), (2, 2000.0)]
        .into_iter()
        .map(|(icao, cfo)| FleetMember {
            profile: TransponderProfile::transponder(cfo, 0.0),
            trajectory: trajectory(icao),
        })
        .collect();
    let channel = ChannelParams {
        snr_db: f64::INFINITY,
        ..ChannelParams::default()
    };
    let caps = synth_authentic(&fleet, 20.0, &channel, &mut rng(2)).unwrap();
    let mean_slope = |icao: u32| {
        let s: Vec<f64> = caps
            .iter()
            .filter(|c| c.claimed_icao.value() == icao)
            .map(|c| pulse_phase_slope(&c.samples))
            .collect();
        s.iter().sum::<f64>() / s.len() as f64
    };
    let want = 2.0 * PI * 2000.0 / 2e6;
    let got = mean_slope(2) - mean_slope(1);
    assert!((got - want).abs() < 0.1 * want, "{got} vs {want}");
}

#[test]
fn ghost_kinematics_follow_the_stated_distributions() {
    let station = ChannelParams::default().station;
    let ghosts = sample_ghosts(10_000, &BTreeSet::new(), &station, &mut rng(3)).unwrap();
    let speeds: Vec<f64> = ghosts.iter().map(|g| g.start.ground_speed).collect();
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let sd = (speeds.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / speeds.len() as f64).sqrt();
    assert!((mean - 230.0).abs() < 1.0, "{mean}");
    assert!((sd - 10.0).abs() < 0.5, "{sd}");
    let alts: Vec<f64> = ghosts.iter().map(|g| g.start.altitude).collect();
    let alt_mean = alts.iter().sum::<f64>() / alts.len() as f64;
    assert!((alt_mean - 9000.0).abs() < 20.0, "{alt_mean}");
    let icaos: BTreeSet<_> = ghosts.iter().map(|g| g.icao).collect();
    assert_eq!(icaos.len(), ghosts.len());
}

#[test]
fn ghost_cadence() {
    let caps = synth_ghost_injection(
        20,
        60.0,
        &spoofer(0.0, vec![1.0]),
        &ChannelParams::default(),
        &mut rng(4),
    )
    .unwrap();
    assert_eq!(caps.len(), 20 * 60 * 2);
    assert!(caps
        .iter()
        .all(|c| c.label == Label::A3 && c.truth_icao.is_none()));
}

#[test]
fn attacks_decode_at_20_db() {
    let channel = ChannelParams::default();
    let fleet = spread_fleet(3, 20_000.0, 100.0, &channel.station, &mut rng(5));
    let authentic = synth_authentic(&fleet, 20.0, &channel, &mut rng(6)).unwrap();
    let recorded: Vec<RecordedFrame> = authentic
        .iter()
        .filter_map(RecordedFrame::from_capture)
        .collect();
    assert_eq!(recorded.len(), authentic.len());
    for case in [DopplerCase::I, DopplerCase::Iii, DopplerCase::V] {
        let sp = SpooferProfile::sdr_default().with_case(case);
        let a1 = synth_message_replay(&recorded, &sp, &channel, &mut rng(7)).unwrap();
        let a3 = synth_ghost_injection(5, 5.0, &sp, &channel, &mut rng(8)).unwrap();
        assert_eq!(a1.len(), recorded.len() * 3);
        for c in a1.iter().chain(&a3) {
            let f = decode_frame(&demodulate(c).unwrap()).unwrap();
            assert_eq!(f.icao, c.claimed_icao);
        }
    }
}

#[test]
fn message_replay_keeps_bits_changes_samples() {
    let channel = ChannelParams::default();
    let fleet = spread_fleet(1, 0.0, 100.0, &channel.station, &mut rng(9));
    let authentic = synth_authentic(&fleet, 4.0, &channel, &mut rng(10)).unwrap();
    let recorded: Vec<RecordedFrame> = authentic
        .iter()
        .filter_map(RecordedFrame::from_capture)
        .collect();
    let replay = synth_message_replay(
        &recorded,
        &SpooferProfile::sdr_default(),
        &channel,
        &mut rng(11),
    )
    .unwrap();
    for (src, copies) in authentic.iter().zip(replay.chunks(3)) {
        for c in copies {
            assert_eq!(demodulate(c).unwrap(), demodulate(src).unwrap());
            assert_ne!(c.samples, src.samples);
            assert_eq!(c.label, Label::A1);
        }
    }
}

#[test]
fn iq_replay_adds_a_linear_ramp() {
    let channel = ChannelParams {
        snr_db: f64::INFINITY,
        ..ChannelParams::default()
    };
    let fleet = spread_fleet(2, 5000.0, 100.0, &channel.station, &mut rng(12));
    let authentic = synth_authentic(&fleet, 3.0, &channel, &mut rng(13)).unwrap();
    let out = synth_iq_replay(
        &authentic,
        &spoofer(5000.0, vec![1.0]),
        &channel,
        false,
        &mut rng(14),
    )
    .unwrap();
    let step = 2.0 * PI * 5000.0 / 2e6;
    for (src, c) in authentic.iter().zip(&out) {
        assert_eq!(c.label, Label::A2);
        assert_eq!(c.claimed_icao, src.claimed_icao);
        for (k, (a, b)) in c.samples.iter().zip(&src.samples).enumerate() {
            let want = b * num_complex::Complex64::from_polar(1.0, step * k as f64);
            assert!((a - want).norm() < 1e-12);
        }
    }
}
