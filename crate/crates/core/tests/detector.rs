use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use soda::detector::*;
use soda::eval::{aircraft_dataset, message_dataset, run_classification, ExperimentConfig};
use soda::features::{FeatureKind, FeatureTable};
use soda::frames::IcaoAddress;
use soda::nn::*;
use soda::phy::{IqCapture, DEFAULT_SAMPLE_RATE};
use soda::synth::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn two_aircraft(duration: f64) -> Vec<IqCapture> {
    let channel = ChannelParams::default();
    let mut base = spread_fleet(2, 0.0, 0.0, &channel.station, &mut rng(1));
    base[0].profile = TransponderProfile::transponder(0.0, 100.0);
    base[1].profile = TransponderProfile::transponder(5000.0, 100.0);
    synth_authentic(&base, duration, &channel, &mut rng(2)).unwrap()
}

fn artifact(kind: FeatureKind, classes: Vec<String>, model: MlpModel) -> ModelArtifact {
    ModelArtifact {
        preset: "test".into(),
        feature_kind: kind,
        normalize: true,
        sample_rate: DEFAULT_SAMPLE_RATE,
        classes,
        split_seed: 0,
        model,
    }
}

fn aircraft_stage(caps: &[IqCapture]) -> (IcaoIndex, ModelArtifact, f64) {
    let mut icaos: Vec<IcaoAddress> = caps.iter().map(|c| c.claimed_icao).collect();
    icaos.sort();
    icaos.dedup();
    let index = IcaoIndex::new(icaos).unwrap();
    let table = FeatureTable::from_captures(caps, FeatureKind::Phase, true).unwrap();
    let data = aircraft_dataset(&table, &index).unwrap();
    let spec = ModelSpec::preset("m1").unwrap();
    let run = run_classification(&data, &spec, &ExperimentConfig::for_preset(&spec, 3)).unwrap();
    let acc = run.report.accuracy;
    (
        index.clone(),
        artifact(FeatureKind::Phase, index.names(), run.model),
        acc,
    )
}

#[test]
fn cfo_alone_separates_two_transmitters() {
    let caps = two_aircraft(1600.0);
    let (_, _, acc) = aircraft_stage(&caps);
    assert!(acc >= 0.99, "{acc}");
}

#[test]
fn pipeline_end_to_end() {
    let caps = two_aircraft(60.0);
    let (index, air, _) = aircraft_stage(&caps);

    let recorded: Vec<RecordedFrame> = caps
        .iter()
        .filter_map(RecordedFrame::from_capture)
        .collect();
    let channel = ChannelParams::default();
    let replay = synth_message_replay(
        &recorded,
        &SpooferProfile::sdr_default(),
        &channel,
        &mut rng(4),
    )
    .unwrap();
    let mut all = caps.clone();
    all.extend(replay.iter().cloned());
    let table = FeatureTable::from_captures(&all, FeatureKind::Iq, true).unwrap();
    let spec = ModelSpec::preset("d3").unwrap();
    let msg = run_classification(
        &message_dataset(&table),
        &spec,
        &ExperimentConfig::for_preset(&spec, 5),
    )
    .unwrap();
    let msg = artifact(
        FeatureKind::Iq,
        vec!["authentic".into(), "malicious".into()],
        msg.model,
    );

    let pipeline = SodaPipeline::new(msg, air, DEFAULT_MESSAGE_THRESHOLD).unwrap();
    assert_eq!(pipeline.icao_index, index);

    let flagged = replay
        .iter()
        .filter(|c| pipeline.detect(c).unwrap().kind == VerdictKind::GroundSpoof)
        .count();
    assert!(
        flagged as f64 >= 0.9 * replay.len() as f64,
        "{flagged}/{}",
        replay.len()
    );

    let authentic = caps
        .iter()
        .filter(|c| pipeline.detect(c).unwrap().kind == VerdictKind::Authentic)
        .count();
    assert!(
        authentic as f64 >= 0.9 * caps.len() as f64,
        "{authentic}/{}",
        caps.len()
    );

    // Claiming the other aircraft's identity is caught by the second stage.
    let other = index.icaos()[1];
    let mut swapped = caps
        .iter()
        .find(|c| c.claimed_icao == index.icaos()[0])
        .unwrap()
        .clone();
    swapped.claimed_icao = other;
    let v = pipeline.detect(&swapped).unwrap();
    if v.kind != VerdictKind::GroundSpoof {
        assert_eq!(v.kind, VerdictKind::AircraftSpoof);
        assert_eq!(v.predicted, Some(index.icaos()[0]));
    }

    let mut stranger = caps[0].clone();
    stranger.claimed_icao = IcaoAddress::new(0x000001).unwrap();
    match pipeline.detect(&stranger) {
        Ok(v) => assert_eq!(v.kind, VerdictKind::GroundSpoof),
        Err(e) => assert!(matches!(e, DetectError::UnknownAircraft(_))),
    }

    for c in caps.iter().take(20) {
        assert_eq!(
            pipeline.detect(c).unwrap(),
            pipeline.detect(&c.scaled(4.0)).unwrap()
        );
    }
}

#[test]
fn pipeline_rejects_bad_threshold() {
    let m = ModelSpec::preset("d1").unwrap();
    let msg = artifact(
        FeatureKind::Iq,
        vec!["a".into(), "m".into()],
        m.build(480, 2, 0).unwrap(),
    );
    let air = artifact(
        FeatureKind::Phase,
        vec!["abc123".into(), "abc124".into()],
        m.build(240, 2, 0).unwrap(),
    );
    assert!(SodaPipeline::new(msg.clone(), air.clone(), 1.0).is_err());
    assert!(SodaPipeline::new(msg.clone(), air.clone(), 0.0).is_err());
    assert!(SodaPipeline::new(air.clone(), msg.clone(), 0.5).is_err());
    assert!(SodaPipeline::new(msg, air, 0.5).is_ok());
}

proptest! {
    #[test]
    fn argmax_survives_monotone_maps(z in prop::collection::vec(-50f64..50.0, 2..10)) {
        let row = ndarray::Array2::from_shape_vec((1, z.len()), z.clone()).unwrap();
        let p = softmax_rows(&row);
        let i = argmax(&z);
        prop_assert_eq!(argmax(p.row(0).as_slice().unwrap()), i);
        let cubed: Vec<f64> = z.iter().map(|v| v * v * v + 2.0 * v).collect();
        prop_assert_eq!(argmax(&cubed), i);
    }
}
