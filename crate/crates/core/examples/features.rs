//! IQ and phase feature vectors for an authentic message and its replay.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soda::features::*;
use soda::synth::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let channel = ChannelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fleet = spread_fleet(1, 0.0, 100.0, &channel.station, &mut rng);
    let authentic = synth_authentic(&fleet, 1.0, &channel, &mut rng)?;
    let recorded: Vec<RecordedFrame> = authentic
        .iter()
        .filter_map(RecordedFrame::from_capture)
        .collect();
    let replay = synth_message_replay(
        &recorded,
        &SpooferProfile::sdr_default(),
        &channel,
        &mut rng,
    )?;

    for (name, c) in [("authentic", &authentic[0]), ("replay", &replay[0])] {
        let iq = extract_iq_features(c, true)?;
        let phase = extract_phase_features(c)?;
        let head: Vec<String> = phase.0[..8].iter().map(|p| format!("{p:+.2}")).collect();
        println!(
            "{name:<9} iq[{}] first I/Q {:+.3} {:+.3}  phase[{}] {}",
            iq.0.len(),
            iq.0[0],
            iq.0[1],
            phase.0.len(),
            head.join(" ")
        );
    }

    let table = FeatureTable::from_captures(&replay, FeatureKind::Iq, true)?;
    println!("feature table {} x {}", table.rows(), table.x.ncols());
    Ok(())
}
