//! Pulse-position modulate a frame, bury it in a noisy stream, find it with
//! the preamble detector and read the bits back.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soda::frames::*;
use soda::impairments::apply_awgn;
use soda::phy::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frame = RawFrame::from_hex("8D40621D58C382D690C8AC2863A7")?;
    let clean = modulate(&frame, DEFAULT_SAMPLE_RATE, 0.5)?;
    println!(
        "{} samples per message at {} MHz",
        clean.samples.len(),
        DEFAULT_SAMPLE_RATE / 1e6
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noisy = apply_awgn(&clean, 15.0, &mut rng)?;

    let mut stream = vec![Complex64::new(0.0, 0.0); 700];
    stream.extend(&noisy.samples);
    stream.extend(vec![Complex64::new(0.0, 0.0); 300]);

    for offset in detect_preamble(&stream, DEFAULT_SAMPLE_RATE, DEFAULT_DETECTION_THRESHOLD_DB)? {
        let window = IqCapture {
            samples: stream[offset..offset + clean.samples.len()].to_vec(),
            ..clean.clone()
        };
        let bits = demodulate(&window)?;
        println!(
            "preamble at sample {offset}: {} -> {:?}",
            bits.to_hex(),
            decode_frame(&bits).map(|f| f.icao.to_string())
        );
    }
    Ok(())
}
