//! Second stage: learn each transponder's phase fingerprint and report
//! per-class precision and recall.

use soda::eval::{aircraft_dataset, run_classification, write_prf_table, ExperimentConfig};
use soda::features::{FeatureKind, FeatureTable};
use soda::nn::ModelSpec;
use soda::phy::Label;
use soda::scenario::{build_corpus, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = build_corpus(&ScenarioConfig {
        seed: 8,
        fleet_size: 5,
        duration_s: 150.0,
        labels: vec![Label::A0],
        ..ScenarioConfig::default()
    })?;
    let index = corpus.icao_index();
    let table = FeatureTable::from_captures(&corpus.captures, FeatureKind::Phase, true)?;
    let data = aircraft_dataset(&table, &index)?;
    let spec = ModelSpec::new("m1-short", &[512], false, 15)?;
    let run = run_classification(&data, &spec, &ExperimentConfig::for_preset(&spec, 8))?;

    println!(
        "accuracy {:.3}  AvgF {:.3}",
        run.report.accuracy, run.report.avg_f
    );
    write_prf_table(&run.report, &index.names(), std::io::stdout())?;
    Ok(())
}
