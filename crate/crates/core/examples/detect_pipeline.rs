//! The full two-stage detector: a message gate followed by a fingerprint
//! check of the claimed identity.

use soda::detector::{write_verdict, IcaoIndex, SodaPipeline, DEFAULT_MESSAGE_THRESHOLD};
use soda::eval::{aircraft_dataset, message_dataset, run_classification, ExperimentConfig};
use soda::features::{FeatureKind, FeatureTable};
use soda::nn::{ModelArtifact, ModelSpec};
use soda::phy::{IqCapture, Label};
use soda::scenario::{build_corpus, ScenarioConfig};

fn trained(
    captures: &[IqCapture],
    kind: FeatureKind,
    index: Option<&IcaoIndex>,
    classes: Vec<String>,
) -> Result<ModelArtifact, Box<dyn std::error::Error>> {
    let table = FeatureTable::from_captures(captures, kind, true)?;
    let data = match index {
        Some(i) => aircraft_dataset(&table, i)?,
        None => message_dataset(&table),
    };
    let spec = ModelSpec::new("demo", &[256], false, 15)?;
    let run = run_classification(&data, &spec, &ExperimentConfig::for_preset(&spec, 2))?;
    Ok(ModelArtifact {
        preset: spec.name,
        feature_kind: kind,
        normalize: true,
        sample_rate: table.sample_rate,
        classes,
        split_seed: 2,
        model: run.model,
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = build_corpus(&ScenarioConfig {
        seed: 2,
        fleet_size: 3,
        duration_s: 120.0,
        attack_messages: 120,
        ghosts: 3,
        ..ScenarioConfig::default()
    })?;
    let index = corpus.icao_index();
    let message = trained(
        &corpus.captures,
        FeatureKind::Iq,
        None,
        vec!["authentic".into(), "malicious".into()],
    )?;
    let aircraft = trained(
        &corpus.with_label(Label::A0),
        FeatureKind::Phase,
        Some(&index),
        index.names(),
    )?;
    let pipeline = SodaPipeline::new(message, aircraft, DEFAULT_MESSAGE_THRESHOLD)?;

    let a0 = corpus.with_label(Label::A0);
    let mut impersonation = a0[0].clone();
    impersonation.claimed_icao = index.icaos()[1];
    let mut out = std::io::stdout();
    for c in [
        &a0[0],
        &corpus.with_label(Label::A1)[0],
        &corpus.with_label(Label::A3)[0],
        &impersonation,
    ] {
        write_verdict(&mut out, c.timestamp, c.claimed_icao, &pipeline.detect(c))?;
    }
    Ok(())
}
