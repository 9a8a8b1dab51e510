//! Generate a small labelled corpus and store it as raw IQ plus a manifest.
//!
//! `cargo run --example synth_corpus -- out_dir`

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use soda::iqfile::{write_iq_file, write_manifest};
use soda::phy::Label;
use soda::scenario::{build_corpus, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "synth_corpus_out".into()),
    );
    let cfg = ScenarioConfig {
        seed: 42,
        fleet_size: 4,
        duration_s: 30.0,
        attack_messages: 60,
        ghosts: 4,
        ..ScenarioConfig::default()
    };
    let corpus = build_corpus(&cfg)?;
    for label in Label::ALL {
        println!("{label:?}: {} captures", corpus.count(label));
    }
    for m in &corpus.fleet {
        println!("aircraft {} cfo {:+8.1} Hz", m.icao(), m.profile.cfo_mean);
    }

    fs::create_dir_all(&dir)?;
    let records = write_iq_file(
        &corpus.captures,
        BufWriter::new(File::create(dir.join("captures.iq"))?),
    )?;
    write_manifest(
        &records,
        BufWriter::new(File::create(dir.join("manifest.jsonl"))?),
    )?;
    println!("wrote {}", dir.display());
    Ok(())
}
