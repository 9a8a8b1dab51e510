//! Carrier offset, Doppler and noise applied to one capture, with the phase
//! slope each one leaves behind.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soda::frames::*;
use soda::impairments::*;
use soda::phy::*;

/// Mean phase advance per sample over consecutive strong samples, in Hz.
fn apparent_offset(c: &IqCapture) -> f64 {
    let peak = c.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let on: Vec<usize> = (0..c.samples.len())
        .filter(|&k| c.samples[k].norm() > 0.5 * peak)
        .collect();
    let (mut sum, mut span) = (0.0, 0.0);
    for w in on.windows(2) {
        sum += (c.samples[w[1]] * c.samples[w[0]].conj()).arg();
        span += (w[1] - w[0]) as f64;
    }
    sum / span / (2.0 * PI) * c.sample_rate
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frame = encode_frame(
        Capability::new(5)?,
        IcaoAddress::new(0xA1B2C3)?,
        MePayload::new(0x99_1234_5678_9ABC)?,
    );
    let clean = modulate(&frame, DEFAULT_SAMPLE_RATE, 0.5)?;

    let cfo = apply_frequency_offset(&clean, 3_000.0, 0.4);
    println!(
        "CFO 3 kHz         -> measured {:8.1} Hz",
        apparent_offset(&cfo)
    );

    let v = 230.0;
    let shift = doppler_shift(ADSB_CARRIER_HZ, v);
    let doppler = apply_doppler_exact(&clean, doppler_alpha(0.0, v));
    println!(
        "closing at {v} m/s -> expected {shift:8.1} Hz, measured {:8.1} Hz",
        apparent_offset(&doppler)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noisy = apply_awgn(&cfo, 20.0, &mut rng)?;
    println!(
        "20 dB SNR         -> measured {:8.1} Hz, still decodes: {}",
        apparent_offset(&noisy),
        demodulate(&noisy)? == frame
    );

    let leaky = apply_carrier_leakage(&clean, 0.3 * 0.5);
    println!(
        "carrier leakage raises mean power {:.4} -> {:.4}",
        clean.mean_power(),
        leaky.mean_power()
    );
    Ok(())
}
