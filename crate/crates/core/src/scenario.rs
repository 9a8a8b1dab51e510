//! Declarative description of a synthetic capture corpus and the builder
//! that turns it into labeled captures.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::detector::IcaoIndex;
use crate::phy::{IqCapture, Label, DEFAULT_SAMPLE_RATE};
use crate::synth::{
    sample_ghosts, spread_fleet, stream_rng, synth_authentic, synth_ghost_flights, synth_iq_replay,
    synth_message_replay, ChannelParams, DopplerCase, FleetMember, RecordedFrame, SpooferProfile,
};
use crate::{Error, Result};

const FLEET_STREAM: u64 = 0;
const AUTHENTIC_STREAM: u64 = 1;
const A1_STREAM: u64 = 2;
const A2_STREAM: u64 = 3;
const A3_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub sample_rate: f64,
    pub snr_db: f64,
    pub fleet_size: usize,
    /// Seconds of authentic traffic; each aircraft sends one message a second.
    pub duration_s: f64,
    pub cfo_spread_hz: f64,
    pub cfo_jitter_hz: f64,
    /// Labels written to the corpus.
    pub labels: Vec<Label>,
    /// Captures per attack label.
    pub attack_messages: usize,
    pub replay_case: DopplerCase,
    pub ghost_case: DopplerCase,
    pub ghosts: usize,
    pub worst_case_replay: bool,
    pub spoofer: SpooferProfile,
}

impl Default for ScenarioConfig {
    /// Twenty transponders over ±20 kHz, 500 messages each, 500 captures of
    /// every attack at 20 dB SNR.
    fn default() -> Self {
        Self {
            seed: 0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            snr_db: 20.0,
            fleet_size: 20,
            duration_s: 500.0,
            cfo_spread_hz: 20_000.0,
            cfo_jitter_hz: 100.0,
            labels: Label::ALL.to_vec(),
            attack_messages: 500,
            replay_case: DopplerCase::I,
            ghost_case: DopplerCase::V,
            ghosts: 20,
            worst_case_replay: false,
            spoofer: SpooferProfile::sdr_default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fleet_size == 0 {
            return Err(Error::Config("fleet size must be at least 1".into()));
        }
        if !(self.duration_s >= 0.0) || !(self.sample_rate > 0.0) {
            return Err(Error::Config(
                "duration and sample rate must be nonnegative and positive".into(),
            ));
        }
        if self.labels.is_empty() {
            return Err(Error::Config("no labels requested".into()));
        }
        if self.labels.contains(&Label::A3) && self.ghosts == 0 {
            return Err(Error::Config(
                "ghost injection needs at least one ghost".into(),
            ));
        }
        self.spoofer.validate()
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            snr_db: self.snr_db,
            sample_rate: self.sample_rate,
            ..ChannelParams::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub fleet: Vec<FleetMember>,
    pub captures: Vec<IqCapture>,
}

impl Corpus {
    pub fn icao_index(&self) -> IcaoIndex {
        IcaoIndex::new(self.fleet.iter().map(|m| m.icao()).collect())
            .expect("fleet addresses are distinct")
    }

    pub fn with_label(&self, label: Label) -> Vec<IqCapture> {
        self.captures
            .iter()
            .filter(|c| c.label == label)
            .cloned()
            .collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.captures.iter().filter(|c| c.label == label).count()
    }
}

fn pick_sources<T: Clone>(pool: &[T], needed: usize, stream: u64, seed: u64) -> Vec<T> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(&mut stream_rng(seed, stream));
    idx.truncate(needed.min(pool.len()));
    idx.sort_unstable();
    idx.into_iter().map(|i| pool[i].clone()).collect()
}

/// Build every requested label. Each part draws from its own stream, so a
/// label's captures do not depend on which other labels were requested.
pub fn build_corpus(cfg: &ScenarioConfig) -> Result<Corpus> {
    cfg.validate()?;
    let channel = cfg.channel();
    let fleet = spread_fleet(
        cfg.fleet_size,
        cfg.cfo_spread_hz,
        cfg.cfo_jitter_hz,
        &channel.station,
        &mut stream_rng(cfg.seed, FLEET_STREAM),
    );
    let authentic = synth_authentic(
        &fleet,
        cfg.duration_s,
        &channel,
        &mut stream_rng(cfg.seed, AUTHENTIC_STREAM),
    )?;
    let wants = |l: Label| cfg.labels.contains(&l);
    let gains = cfg.spoofer.gains.len();
    let sources_needed = cfg.attack_messages.div_ceil(gains);
    let mut captures = Vec::new();
    if wants(Label::A0) {
        captures.extend(authentic.iter().cloned());
    }
    if wants(Label::A1) {
        let recorded: Vec<RecordedFrame> = authentic
            .iter()
            .filter_map(RecordedFrame::from_capture)
            .collect();
        let sources = pick_sources(&recorded, sources_needed, A1_STREAM, cfg.seed);
        let spoofer = cfg.spoofer.clone().with_case(cfg.replay_case);
        let mut a1 = synth_message_replay(
            &sources,
            &spoofer,
            &channel,
            &mut stream_rng(cfg.seed, A1_STREAM),
        )?;
        a1.truncate(cfg.attack_messages);
        captures.extend(a1);
    }
    if wants(Label::A2) {
        let sources = pick_sources(&authentic, sources_needed, A2_STREAM, cfg.seed);
        let copies = if cfg.worst_case_replay { 1 } else { gains };
        let sources = &sources[..cfg.attack_messages.div_ceil(copies).min(sources.len())];
        let mut a2 = synth_iq_replay(
            sources,
            &cfg.spoofer,
            &channel,
            cfg.worst_case_replay,
            &mut stream_rng(cfg.seed, A2_STREAM),
        )?;
        a2.truncate(cfg.attack_messages);
        captures.extend(a2);
    }
    if wants(Label::A3) {
        let mut rng = stream_rng(cfg.seed, A3_STREAM);
        let taken: BTreeSet<_> = fleet.iter().map(|m| m.icao()).collect();
        let ghosts = sample_ghosts(cfg.ghosts, &taken, &channel.station, &mut rng)?;
        let per_second = cfg.ghosts * 2 * gains;
        let seconds = cfg.attack_messages.div_ceil(per_second) as f64;
        let spoofer = cfg.spoofer.clone().with_case(cfg.ghost_case);
        let mut a3 = synth_ghost_flights(&ghosts, seconds, &spoofer, &channel, &mut rng)?;
        a3.truncate(cfg.attack_messages);
        captures.extend(a3);
    }
    Ok(Corpus { fleet, captures })
}
