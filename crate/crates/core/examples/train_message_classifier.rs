//! Train the first-stage network to tell authentic messages from replays and
//! ghosts, then save it.

use soda::eval::{message_dataset, run_classification, ExperimentConfig};
use soda::features::{FeatureKind, FeatureTable};
use soda::nn::{load_model, save_model, ModelArtifact, ModelSpec};
use soda::scenario::{build_corpus, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = build_corpus(&ScenarioConfig {
        seed: 5,
        fleet_size: 5,
        duration_s: 60.0,
        attack_messages: 100,
        ghosts: 5,
        ..ScenarioConfig::default()
    })?;
    let table = FeatureTable::from_captures(&corpus.captures, FeatureKind::Iq, true)?;
    let spec = ModelSpec::new("d3-short", &[128, 128], false, 10)?;
    let run = run_classification(
        &message_dataset(&table),
        &spec,
        &ExperimentConfig::for_preset(&spec, 5),
    )?;

    for e in &run.history.epochs {
        println!(
            "epoch {:>2} train {:.4} val {:.4} acc {:.3}",
            e.epoch, e.train_loss, e.val_loss, e.val_accuracy
        );
    }
    let c = &run.confusion.counts;
    println!(
        "test P_d {:.3}  P_fa {:.3}",
        c[1][1] as f64 / (c[1][0] + c[1][1]) as f64,
        c[0][1] as f64 / (c[0][0] + c[0][1]) as f64
    );

    let artifact = ModelArtifact {
        preset: spec.name.clone(),
        feature_kind: FeatureKind::Iq,
        normalize: true,
        sample_rate: table.sample_rate,
        classes: vec!["authentic".into(), "malicious".into()],
        split_seed: 5,
        model: run.model,
    };
    let mut json = Vec::new();
    save_model(&artifact, &mut json)?;
    assert_eq!(load_model(json.as_slice())?, artifact);
    println!("model artifact: {} bytes", json.len());
    Ok(())
}
