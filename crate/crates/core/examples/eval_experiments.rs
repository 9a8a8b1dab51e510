//! Attack-diversity table and a training-ratio sweep on a small corpus.

use soda::eval::*;
use soda::features::{FeatureKind, FeatureTable};
use soda::nn::ModelSpec;
use soda::phy::Label;
use soda::scenario::{build_corpus, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = build_corpus(&ScenarioConfig {
        seed: 11,
        fleet_size: 4,
        duration_s: 60.0,
        attack_messages: 80,
        ghosts: 4,
        ..ScenarioConfig::default()
    })?;
    let spec = ModelSpec::new("d1-short", &[128], false, 5)?;
    let cfg = ExperimentConfig::for_preset(&spec, 11);

    let iq = FeatureTable::from_captures(&corpus.captures, FeatureKind::Iq, true)?;
    let rows = run_attack_diversity(&iq, &spec, &cfg)?;
    write_diversity_table(&rows, std::io::stdout())?;

    let phase =
        FeatureTable::from_captures(&corpus.with_label(Label::A0), FeatureKind::Phase, true)?;
    let data = aircraft_dataset(&phase, &corpus.icao_index())?;
    let sweep = sweep_training_ratio(&data, &spec, &[0.2, 0.6, 1.0], &cfg)?;
    write_sweep_table("ratio", &sweep, std::io::stdout())?;

    let mut flagged = vec![true; 95];
    flagged.extend([false; 5]);
    flagged.extend((0..200).map(|i| i < 3));
    let malicious: Vec<bool> = (0..300).map(|i| i < 100).collect();
    let (pd, pfa) = pd_pfa(&flagged, &malicious)?;
    println!("example P_d {pd} P_fa {pfa}");
    Ok(())
}
