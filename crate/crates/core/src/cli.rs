//! The `soda` command line: synth, features, train, eval and detect.
//!
//! Every command accepts `--config FILE` holding the same TOML record it
//! writes next to its outputs; flags override file values. Outputs are
//! assembled in memory and only written once the command has succeeded.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::detector::{write_verdict, IcaoIndex, SodaPipeline, DEFAULT_MESSAGE_THRESHOLD};
use crate::eval::{
    aircraft_dataset, message_dataset, pd_pfa, prf_scores, run_attack_diversity, split_dataset,
    sweep_num_classes, sweep_training_ratio, write_diversity_table, write_prf_table,
    write_sweep_table, ConfusionMatrix, ExperimentConfig, SplitSpec,
};
use crate::features::{read_feature_table, write_feature_table, FeatureKind, FeatureTable};
use crate::frames::decode_frame;
use crate::iqfile::{decode_iq, read_captures, read_manifest, write_iq_file, write_manifest};
use crate::nn::{load_model, save_model, train, AdamConfig, ModelArtifact, ModelSpec, TrainConfig};
use crate::phy::{
    demodulate, detect_preamble, IqCapture, Label, PulseTiming, ADSB_CARRIER_HZ,
    DEFAULT_DETECTION_THRESHOLD_DB, DEFAULT_SAMPLE_RATE,
};
use crate::scenario::{build_corpus, ScenarioConfig};
use crate::synth::DopplerCase;
use crate::{Error, Result};

pub const IQ_FILE: &str = "captures.iq";
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const FLEET_FILE: &str = "fleet.json";
pub const FEATURES_FILE: &str = "features.bin";
pub const MODEL_FILE: &str = "model.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const VERDICTS_FILE: &str = "verdicts.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "soda",
    version,
    about = "ADS-B spoofing detection from physical-layer fingerprints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a labeled IQ corpus.
    Synth(SynthArgs),
    /// Turn an IQ corpus into a feature table.
    Features(FeaturesArgs),
    /// Train a preset network on a feature table.
    Train(TrainArgs),
    /// Score a model or run one of the experiment harnesses.
    Eval(EvalArgs),
    /// Run the two-stage detector over a raw IQ stream.
    Detect(DetectArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Message,
    Aircraft,
}

impl Stage {
    fn feature_kind(self) -> FeatureKind {
        match self {
            Stage::Message => FeatureKind::Iq,
            Stage::Aircraft => FeatureKind::Phase,
        }
    }

    fn of(kind: FeatureKind) -> Stage {
        match kind {
            FeatureKind::Iq => Stage::Message,
            FeatureKind::Phase => Stage::Aircraft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Baseline,
    AttackDiversity,
    RatioSweep,
    ClassSweep,
}

fn parse_label(s: &str) -> std::result::Result<Label, String> {
    Label::parse(s).ok_or_else(|| format!("unknown label {s:?}, expected a0..a3"))
}

fn parse_case(s: &str) -> std::result::Result<DopplerCase, String> {
    DopplerCase::parse(s).ok_or_else(|| format!("unknown doppler case {s:?}, expected i..v"))
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write outputs here.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// TOML file with defaults for this command.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub fleet: Option<usize>,
    /// Seconds of authentic traffic.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Labels to generate, e.g. a0,a1,a2,a3.
    #[arg(long, value_delimiter = ',', value_parser = parse_label)]
    pub attacks: Option<Vec<Label>>,
    #[arg(long)]
    pub attack_messages: Option<usize>,
    /// Doppler/CFO case for message replay and ghost injection.
    #[arg(long, value_parser = parse_case)]
    pub doppler_case: Option<DopplerCase>,
    #[arg(long)]
    pub ghosts: Option<usize>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub cfo_spread: Option<f64>,
    /// IQ replay without any spoofer impairment besides channel noise.
    #[arg(long)]
    pub worst_case: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesConfig {
    pub input: PathBuf,
    pub stage: Stage,
    pub normalize: bool,
    /// Rows kept; empty keeps the stage default.
    pub labels: Vec<Label>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory written by `synth`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub stage: Option<Stage>,
    /// Keep raw IQ amplitudes instead of peak-normalizing.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_label)]
    pub labels: Option<Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub features: PathBuf,
    pub preset: String,
    pub stage: Stage,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2_coefficient: f64,
    pub balance_classes: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Feature table written by `features`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// d1, d2, d3, m1 .. m5.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub stage: Option<Stage>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to the preset's epoch count.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Oversample minority classes.
    #[arg(long)]
    pub balance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalRunConfig {
    pub features: PathBuf,
    pub model: Option<PathBuf>,
    pub experiment: Experiment,
    pub preset: Option<String>,
    pub seed: u64,
    pub epochs: Option<usize>,
    pub ratios: Vec<f64>,
    pub counts: Vec<usize>,
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Trained model, needed for the baseline experiment.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub experiment: Option<Experiment>,
    /// Preset trained in each experiment cell.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    /// Malicious-probability threshold for message models.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectRunConfig {
    pub input: PathBuf,
    pub message_model: PathBuf,
    pub aircraft_model: PathBuf,
    pub threshold: f64,
    pub sample_rate: f64,
    pub preamble_threshold_db: f64,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: Common,
    /// Raw unsigned 8-bit interleaved IQ stream.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub message_model: Option<PathBuf>,
    #[arg(long)]
    pub aircraft_model: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub preamble_threshold_db: Option<f64>,
}

/// Files produced by a command, written together at the end.
#[derive(Default)]
struct Outputs(Vec<(String, Vec<u8>)>);

impl Outputs {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.0.push((name.to_string(), bytes));
    }

    fn add_config<T: Serialize>(&mut self, command: &str, cfg: &T) -> Result<()> {
        let text = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
        self.add(&format!("{command}_config.toml"), text.into_bytes());
        Ok(())
    }

    fn write(self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in self.0 {
            let tmp = dir.join(format!(".{name}.partial"));
            fs::write(&tmp, &bytes)?;
            fs::rename(&tmp, dir.join(&name))?;
        }
        Ok(())
    }
}

fn load_config<T: DeserializeOwned>(path: &Option<PathBuf>) -> Result<Option<T>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            toml::from_str(&text)
                .map(Some)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn open_read(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn resolve_synth(args: &SynthArgs) -> Result<ScenarioConfig> {
    let mut cfg: ScenarioConfig = load_config(&args.common.config)?.unwrap_or_default();
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.sample_rate {
        cfg.sample_rate = v;
    }
    if let Some(v) = args.fleet {
        cfg.fleet_size = v;
    }
    if let Some(v) = args.duration {
        cfg.duration_s = v;
    }
    if let Some(v) = &args.attacks {
        let set: BTreeSet<Label> = v.iter().copied().collect();
        cfg.labels = set.into_iter().collect();
    }
    if let Some(v) = args.attack_messages {
        cfg.attack_messages = v;
    }
    if let Some(v) = args.doppler_case {
        cfg.replay_case = v;
        cfg.ghost_case = v;
    }
    if let Some(v) = args.ghosts {
        cfg.ghosts = v;
    }
    if let Some(v) = args.snr_db {
        cfg.snr_db = v;
    }
    if let Some(v) = args.cfo_spread {
        cfg.cfo_spread_hz = v;
    }
    if args.worst_case {
        cfg.worst_case_replay = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let cfg = resolve_synth(args)?;
    let corpus = build_corpus(&cfg)?;
    let mut iq = Vec::new();
    let records = write_iq_file(&corpus.captures, &mut iq)?;
    let mut manifest = Vec::new();
    write_manifest(&records, &mut manifest)?;
    let fleet =
        serde_json::to_vec_pretty(&corpus.fleet).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Outputs::default();
    out.add(IQ_FILE, iq);
    out.add(MANIFEST_FILE, manifest);
    out.add(FLEET_FILE, fleet);
    out.add_config("synth", &cfg)?;
    out.write(&args.common.out_dir)?;
    eprintln!(
        "wrote {} captures to {}",
        corpus.captures.len(),
        args.common.out_dir.display()
    );
    Ok(())
}

/// Captures and manifest from a `synth` output directory.
pub fn read_corpus_dir(dir: &Path) -> Result<Vec<IqCapture>> {
    let bytes = fs::read(dir.join(IQ_FILE))
        .map_err(|e| Error::Config(format!("{}: {e}", dir.join(IQ_FILE).display())))?;
    let manifest = read_manifest(BufReader::new(open_read(&dir.join(MANIFEST_FILE))?))?;
    Ok(read_captures(&bytes, &manifest)?)
}

pub fn resolve_features(args: &FeaturesArgs) -> Result<FeaturesConfig> {
    let file: Option<FeaturesConfig> = load_config(&args.common.config)?;
    let input = args
        .input
        .clone()
        .or(file.as_ref().map(|f| f.input.clone()));
    let stage = args
        .stage
        .or(file.as_ref().map(|f| f.stage))
        .unwrap_or(Stage::Message);
    let normalize = !args.no_normalize && file.as_ref().is_none_or(|f| f.normalize);
    let labels = match (&args.labels, &file) {
        (Some(l), _) => l.clone(),
        (None, Some(f)) if !f.labels.is_empty() => f.labels.clone(),
        _ => match stage {
            Stage::Message => Label::ALL.to_vec(),
            Stage::Aircraft => vec![Label::A0],
        },
    };
    Ok(FeaturesConfig {
        input: required(input, "input")?,
        stage,
        normalize,
        labels,
    })
}

fn cmd_features(args: &FeaturesArgs) -> Result<()> {
    let cfg = resolve_features(args)?;
    let captures: Vec<IqCapture> = read_corpus_dir(&cfg.input)?
        .into_iter()
        .filter(|c| cfg.labels.contains(&c.label))
        .collect();
    if captures.is_empty() {
        return Err(Error::Config(
            "no captures with the requested labels".into(),
        ));
    }
    let table = FeatureTable::from_captures(&captures, cfg.stage.feature_kind(), cfg.normalize)?;
    let mut bytes = Vec::new();
    write_feature_table(&table, &mut bytes)?;
    let mut out = Outputs::default();
    out.add(FEATURES_FILE, bytes);
    out.add_config("features", &cfg)?;
    out.write(&args.common.out_dir)?;
    eprintln!("wrote {} x {} features", table.x.nrows(), table.x.ncols());
    Ok(())
}

pub fn resolve_train(args: &TrainArgs) -> Result<TrainRunConfig> {
    let file: Option<TrainRunConfig> = load_config(&args.common.config)?;
    let preset = required(
        args.preset
            .clone()
            .or(file.as_ref().map(|f| f.preset.clone())),
        "preset",
    )?;
    let spec = ModelSpec::preset(&preset)?;
    let defaults = TrainConfig::default();
    let stage =
        args.stage
            .or(file.as_ref().map(|f| f.stage))
            .unwrap_or(if spec.is_message_preset() {
                Stage::Message
            } else {
                Stage::Aircraft
            });
    Ok(TrainRunConfig {
        features: required(
            args.features
                .clone()
                .or(file.as_ref().map(|f| f.features.clone())),
            "features",
        )?,
        preset: spec.name.clone(),
        stage,
        seed: args.seed.or(file.as_ref().map(|f| f.seed)).unwrap_or(0),
        epochs: args
            .epochs
            .or(file.as_ref().map(|f| f.epochs))
            .unwrap_or(spec.epochs),
        batch_size: args
            .batch_size
            .or(file.as_ref().map(|f| f.batch_size))
            .unwrap_or(defaults.batch_size),
        learning_rate: args
            .learning_rate
            .or(file.as_ref().map(|f| f.learning_rate))
            .unwrap_or(defaults.adam.learning_rate),
        l2_coefficient: args
            .l2
            .or(file.as_ref().map(|f| f.l2_coefficient))
            .unwrap_or(defaults.l2_coefficient),
        balance_classes: args.balance || file.as_ref().is_some_and(|f| f.balance_classes),
    })
}

fn read_features(path: &Path) -> Result<FeatureTable> {
    Ok(read_feature_table(BufReader::new(open_read(path)?))?)
}

/// Targets and class names for a feature table at a given stage.
fn stage_dataset(table: &FeatureTable, stage: Stage) -> Result<(crate::nn::Dataset, Vec<String>)> {
    if table.kind != stage.feature_kind() {
        return Err(Error::Config(format!(
            "{stage:?} stage needs {:?} features, table holds {:?}",
            stage.feature_kind(),
            table.kind
        )));
    }
    match stage {
        Stage::Message => Ok((
            message_dataset(table),
            vec!["authentic".into(), "malicious".into()],
        )),
        Stage::Aircraft => {
            let icaos: BTreeSet<_> = table.truth_icao.iter().flatten().copied().collect();
            let index = IcaoIndex::new(icaos.into_iter().collect())?;
            Ok((aircraft_dataset(table, &index)?, index.names()))
        }
    }
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = resolve_train(args)?;
    let spec = ModelSpec::preset(&cfg.preset)?;
    let table = read_features(&cfg.features)?;
    let (data, classes) = stage_dataset(&table, cfg.stage)?;
    let split = split_dataset(&data.y, &SplitSpec::with_seed(cfg.seed))?;
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        adam: AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
        l2_coefficient: cfg.l2_coefficient,
        seed: cfg.seed,
        balance_classes: cfg.balance_classes,
    };
    let mut model = spec.build(data.x.ncols(), data.classes, cfg.seed)?;
    let history = train(
        &mut model,
        &data.subset(&split.train),
        &data.subset(&split.validation),
        &train_cfg,
    )?;
    let artifact = ModelArtifact {
        preset: spec.name,
        feature_kind: table.kind,
        normalize: table.normalized,
        sample_rate: table.sample_rate,
        classes,
        split_seed: cfg.seed,
        model,
    };
    let mut model_bytes = Vec::new();
    save_model(&artifact, &mut model_bytes)?;
    let mut hist = Vec::new();
    history.write_csv(&mut hist)?;
    let mut out = Outputs::default();
    out.add(MODEL_FILE, model_bytes);
    out.add(HISTORY_FILE, hist);
    out.add_config("train", &cfg)?;
    out.write(&args.common.out_dir)?;
    if let Some(best) = history.best() {
        eprintln!(
            "best epoch {} with validation accuracy {:.4}",
            best.epoch, best.val_accuracy
        );
    }
    Ok(())
}

pub fn resolve_eval(args: &EvalArgs) -> Result<EvalRunConfig> {
    let file: Option<EvalRunConfig> = load_config(&args.common.config)?;
    let f = file.as_ref();
    let cfg = EvalRunConfig {
        features: required(
            args.features.clone().or(f.map(|f| f.features.clone())),
            "features",
        )?,
        model: args.model.clone().or(f.and_then(|f| f.model.clone())),
        experiment: args
            .experiment
            .or(f.map(|f| f.experiment))
            .unwrap_or(Experiment::Baseline),
        preset: args.preset.clone().or(f.and_then(|f| f.preset.clone())),
        seed: args.seed.or(f.map(|f| f.seed)).unwrap_or(0),
        epochs: args.epochs.or(f.and_then(|f| f.epochs)),
        ratios: args
            .ratios
            .clone()
            .or(f.map(|f| f.ratios.clone()))
            .unwrap_or_else(|| (2..=10).map(|i| i as f64 / 10.0).collect()),
        counts: args
            .counts
            .clone()
            .or(f.map(|f| f.counts.clone()))
            .unwrap_or_default(),
        threshold: args
            .threshold
            .or(f.map(|f| f.threshold))
            .unwrap_or(DEFAULT_MESSAGE_THRESHOLD),
    };
    if cfg.experiment == Experiment::Baseline && cfg.model.is_none() {
        return Err(Error::Config(
            "--model is required for the baseline experiment".into(),
        ));
    }
    if cfg.experiment != Experiment::Baseline && cfg.preset.is_none() {
        return Err(Error::Config("--preset is required for experiments".into()));
    }
    Ok(cfg)
}

fn experiment_config(cfg: &EvalRunConfig) -> Result<(ModelSpec, ExperimentConfig)> {
    let spec = ModelSpec::preset(cfg.preset.as_deref().unwrap_or_default())?;
    let mut exp = ExperimentConfig::for_preset(&spec, cfg.seed);
    if let Some(e) = cfg.epochs {
        exp.train.epochs = e;
    }
    Ok((spec, exp))
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = resolve_eval(args)?;
    let table = read_features(&cfg.features)?;
    let stage = Stage::of(table.kind);
    let mut out = Outputs::default();
    match cfg.experiment {
        Experiment::Baseline => {
            let path = cfg.model.as_ref().expect("checked in resolve");
            let artifact = load_model(BufReader::new(open_read(path)?))?;
            let (data, classes) = stage_dataset(&table, stage)?;
            if classes != artifact.classes {
                return Err(Error::Config(
                    "model classes do not match the feature table".into(),
                ));
            }
            let split = split_dataset(&data.y, &SplitSpec::with_seed(artifact.split_seed))?;
            let test = data.subset(&split.test);
            let probs = artifact
                .model
                .forward(test.x.view(), crate::nn::Mode::Inference)?;
            let mut text = Vec::new();
            match stage {
                Stage::Message => {
                    let flagged: Vec<bool> = probs
                        .column(1)
                        .iter()
                        .map(|&p| p >= cfg.threshold)
                        .collect();
                    let labels: Vec<Label> = split.test.iter().map(|&r| table.labels[r]).collect();
                    let malicious: Vec<bool> = labels.iter().map(|l| l.is_malicious()).collect();
                    let (pd, pfa) = pd_pfa(&flagged, &malicious)?;
                    writeln!(text, "attack,pd,pfa")?;
                    writeln!(text, "all,{pd},{pfa}")?;
                    for attack in Label::ATTACKS {
                        let (f, m): (Vec<bool>, Vec<bool>) = flagged
                            .iter()
                            .zip(&labels)
                            .filter(|(_, l)| **l == attack || **l == Label::A0)
                            .map(|(&f, l)| (f, l.is_malicious()))
                            .unzip();
                        if let Ok((pd, pfa)) = pd_pfa(&f, &m) {
                            writeln!(text, "{attack},{pd},{pfa}")?;
                        }
                    }
                    eprintln!("P_d {pd:.4}  P_fa {pfa:.4}");
                    out.add("detection.csv", text);
                }
                Stage::Aircraft => {
                    let predicted = artifact.model.predict(test.x.view())?;
                    let cm = ConfusionMatrix::from_predictions(data.classes, &test.y, &predicted)?;
                    let report = prf_scores(&cm)?;
                    write_prf_table(&report, &classes, &mut text)?;
                    let mut grid = Vec::new();
                    cm.write_grid(&mut grid)?;
                    eprintln!("accuracy {:.4}  AvgF {:.4}", report.accuracy, report.avg_f);
                    out.add("classification.csv", text);
                    out.add("confusion.csv", grid);
                }
            }
        }
        Experiment::AttackDiversity => {
            if stage != Stage::Message {
                return Err(Error::Config(
                    "attack diversity needs an IQ feature table".into(),
                ));
            }
            let (spec, exp) = experiment_config(&cfg)?;
            let rows = run_attack_diversity(&table, &spec, &exp)?;
            let mut text = Vec::new();
            write_diversity_table(&rows, &mut text)?;
            out.add("attack_diversity.csv", text);
        }
        Experiment::RatioSweep | Experiment::ClassSweep => {
            let (spec, exp) = experiment_config(&cfg)?;
            let (data, _) = stage_dataset(&table, stage)?;
            let mut text = Vec::new();
            if cfg.experiment == Experiment::RatioSweep {
                let rows = sweep_training_ratio(&data, &spec, &cfg.ratios, &exp)?;
                write_sweep_table("ratio", &rows, &mut text)?;
                out.add("ratio_sweep.csv", text);
            } else {
                let counts = if cfg.counts.is_empty() {
                    let mut c: Vec<usize> = (1..)
                        .map(|i| 5 * i)
                        .take_while(|&c| c < data.classes)
                        .collect();
                    c.push(data.classes);
                    c
                } else {
                    cfg.counts.clone()
                };
                let rows = sweep_num_classes(&data, &spec, &counts, &exp)?;
                write_sweep_table("classes", &rows, &mut text)?;
                out.add("class_sweep.csv", text);
            }
        }
    }
    out.add_config("eval", &cfg)?;
    out.write(&args.common.out_dir)
}

pub fn resolve_detect(args: &DetectArgs) -> Result<DetectRunConfig> {
    let file: Option<DetectRunConfig> = load_config(&args.common.config)?;
    let f = file.as_ref();
    Ok(DetectRunConfig {
        input: required(args.input.clone().or(f.map(|f| f.input.clone())), "input")?,
        message_model: required(
            args.message_model
                .clone()
                .or(f.map(|f| f.message_model.clone())),
            "message-model",
        )?,
        aircraft_model: required(
            args.aircraft_model
                .clone()
                .or(f.map(|f| f.aircraft_model.clone())),
            "aircraft-model",
        )?,
        threshold: args
            .threshold
            .or(f.map(|f| f.threshold))
            .unwrap_or(DEFAULT_MESSAGE_THRESHOLD),
        sample_rate: args
            .sample_rate
            .or(f.map(|f| f.sample_rate))
            .unwrap_or(DEFAULT_SAMPLE_RATE),
        preamble_threshold_db: args
            .preamble_threshold_db
            .or(f.map(|f| f.preamble_threshold_db))
            .unwrap_or(DEFAULT_DETECTION_THRESHOLD_DB),
    })
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let cfg = resolve_detect(args)?;
    let message = load_model(BufReader::new(open_read(&cfg.message_model)?))?;
    let aircraft = load_model(BufReader::new(open_read(&cfg.aircraft_model)?))?;
    let pipeline = SodaPipeline::new(message, aircraft, cfg.threshold)?;
    let bytes =
        fs::read(&cfg.input).map_err(|e| Error::Config(format!("{}: {e}", cfg.input.display())))?;
    let stream = decode_iq(&bytes)?;
    let len = PulseTiming::message_len(cfg.sample_rate)?;
    let offsets = detect_preamble(&stream, cfg.sample_rate, cfg.preamble_threshold_db)?;
    let mut verdicts = Vec::new();
    let mut undecodable = 0;
    for &offset in &offsets {
        let mut capture = IqCapture {
            samples: stream[offset..offset + len].to_vec(),
            sample_rate: cfg.sample_rate,
            carrier_hz: ADSB_CARRIER_HZ,
            label: Label::A0,
            claimed_icao: crate::frames::IcaoAddress::new(0).expect("zero is a valid address"),
            truth_icao: None,
            timestamp: offset as f64 / cfg.sample_rate,
            impairments: Default::default(),
        };
        let Some(frame) = demodulate(&capture)
            .ok()
            .filter(|f| decode_frame(f).is_ok())
        else {
            undecodable += 1;
            continue;
        };
        capture.claimed_icao = frame.icao();
        let verdict = pipeline.detect(&capture);
        write_verdict(
            &mut verdicts,
            capture.timestamp,
            capture.claimed_icao,
            &verdict,
        )?;
    }
    if offsets.is_empty() {
        eprintln!("warning: no preambles found in {}", cfg.input.display());
    }
    if undecodable > 0 {
        eprintln!("warning: skipped {undecodable} messages that failed the parity check");
    }
    let mut out = Outputs::default();
    out.add(VERDICTS_FILE, verdicts);
    out.add_config("detect", &cfg)?;
    out.write(&args.common.out_dir)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Features(a) => cmd_features(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Detect(a) => cmd_detect(a),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
