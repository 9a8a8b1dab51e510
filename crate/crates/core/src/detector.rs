//! Two-stage detection: the message classifier flags ground-based spoofers,
//! then the aircraft classifier checks the claimed ICAO address against the
//! transmitter it recognizes.

use std::collections::BTreeMap;
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{extract, FeatureError, FeatureKind};
use crate::frames::IcaoAddress;
use crate::nn::{argmax, Mode, ModelArtifact, NnError};
use crate::phy::IqCapture;

pub const DEFAULT_MESSAGE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("aircraft {0} is not known to the aircraft classifier")]
    UnknownAircraft(IcaoAddress),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid pipeline: {0}")]
    Config(String),
}

impl From<NnError> for DetectError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Shape(s) => DetectError::Shape(s),
            other => DetectError::Config(other.to_string()),
        }
    }
}

impl From<FeatureError> for DetectError {
    fn from(e: FeatureError) -> Self {
        DetectError::Shape(e.to_string())
    }
}

/// Bijection between aircraft-classifier outputs and ICAO addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcaoIndex {
    classes: Vec<IcaoAddress>,
    lookup: BTreeMap<IcaoAddress, usize>,
}

impl IcaoIndex {
    pub fn new(classes: Vec<IcaoAddress>) -> Result<Self, DetectError> {
        let mut lookup = BTreeMap::new();
        for (i, &icao) in classes.iter().enumerate() {
            if lookup.insert(icao, i).is_some() {
                return Err(DetectError::Config(format!(
                    "{icao} appears twice in the class table"
                )));
            }
        }
        Ok(Self { classes, lookup })
    }

    pub fn from_names(names: &[String]) -> Result<Self, DetectError> {
        let icaos = names
            .iter()
            .map(|n| {
                n.parse()
                    .map_err(|_| DetectError::Config(format!("class {n:?} is not an ICAO address")))
            })
            .collect::<Result<Vec<IcaoAddress>, _>>()?;
        Self::new(icaos)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, icao: IcaoAddress) -> Option<usize> {
        self.lookup.get(&icao).copied()
    }

    pub fn icao_of(&self, class: usize) -> Option<IcaoAddress> {
        self.classes.get(class).copied()
    }

    pub fn icaos(&self) -> &[IcaoAddress] {
        &self.classes
    }

    pub fn names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.to_string()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Authentic,
    GroundSpoof,
    AircraftSpoof,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub claimed: IcaoAddress,
    pub predicted: Option<IcaoAddress>,
    pub message_malicious_prob: f64,
    pub aircraft_class_probs: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SodaPipeline {
    pub message_model: ModelArtifact,
    pub aircraft_model: ModelArtifact,
    pub icao_index: IcaoIndex,
    pub message_threshold: f64,
}

fn features_for(model: &ModelArtifact, capture: &IqCapture) -> Result<Array2<f64>, DetectError> {
    if capture.sample_rate != model.sample_rate {
        return Err(DetectError::Shape(format!(
            "capture sampled at {} Hz, model expects {} Hz",
            capture.sample_rate, model.sample_rate
        )));
    }
    let row = extract(capture, model.feature_kind, model.normalize)?;
    Ok(Array2::from_shape_vec((1, row.len()), row).expect("single row"))
}

impl SodaPipeline {
    pub fn new(
        message_model: ModelArtifact,
        aircraft_model: ModelArtifact,
        threshold: f64,
    ) -> Result<Self, DetectError> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(DetectError::Config(format!(
                "threshold {threshold} outside (0, 1)"
            )));
        }
        if message_model.model.classes() != Some(2) {
            return Err(DetectError::Config(
                "message model must have two outputs".into(),
            ));
        }
        if message_model.feature_kind != FeatureKind::Iq
            || aircraft_model.feature_kind != FeatureKind::Phase
        {
            return Err(DetectError::Config(
                "message model takes IQ features and aircraft model takes phase features".into(),
            ));
        }
        let icao_index = IcaoIndex::from_names(&aircraft_model.classes)?;
        if aircraft_model.model.classes() != Some(icao_index.len()) {
            return Err(DetectError::Config(
                "aircraft class table does not match model outputs".into(),
            ));
        }
        Ok(Self {
            message_model,
            aircraft_model,
            icao_index,
            message_threshold: threshold,
        })
    }

    /// Softmax probability of the malicious class.
    pub fn classify_message(&self, capture: &IqCapture) -> Result<f64, DetectError> {
        let x = features_for(&self.message_model, capture)?;
        let p = self
            .message_model
            .model
            .forward(x.view(), Mode::Inference)?;
        Ok(p[[0, 1]])
    }

    /// Predicted source transmitter and the full class distribution.
    pub fn classify_aircraft(
        &self,
        capture: &IqCapture,
    ) -> Result<(IcaoAddress, Vec<f64>), DetectError> {
        if self.icao_index.class_of(capture.claimed_icao).is_none() {
            return Err(DetectError::UnknownAircraft(capture.claimed_icao));
        }
        let x = features_for(&self.aircraft_model, capture)?;
        let p = self
            .aircraft_model
            .model
            .forward(x.view(), Mode::Inference)?;
        let probs = p.row(0).to_vec();
        let predicted = self
            .icao_index
            .icao_of(argmax(&probs))
            .expect("class in index");
        Ok((predicted, probs))
    }

    pub fn detect(&self, capture: &IqCapture) -> Result<Verdict, DetectError> {
        let prob = self.classify_message(capture)?;
        if prob >= self.message_threshold {
            return Ok(Verdict {
                kind: VerdictKind::GroundSpoof,
                claimed: capture.claimed_icao,
                predicted: None,
                message_malicious_prob: prob,
                aircraft_class_probs: None,
            });
        }
        let (predicted, probs) = self.classify_aircraft(capture)?;
        Ok(Verdict {
            kind: if predicted == capture.claimed_icao {
                VerdictKind::Authentic
            } else {
                VerdictKind::AircraftSpoof
            },
            claimed: capture.claimed_icao,
            predicted: Some(predicted),
            message_malicious_prob: prob,
            aircraft_class_probs: Some(probs),
        })
    }
}

#[derive(Serialize)]
struct VerdictLine<'a> {
    timestamp: f64,
    kind: &'a str,
    claimed: IcaoAddress,
    predicted: Option<IcaoAddress>,
    message_malicious_prob: Option<f64>,
    aircraft_class_probs: Option<&'a [f64]>,
}

/// One JSON record per line. Captures from aircraft the pipeline has never
/// seen are written with kind `unknown_aircraft`; other errors are returned.
pub fn write_verdict<W: Write>(
    out: &mut W,
    timestamp: f64,
    claimed: IcaoAddress,
    verdict: &Result<Verdict, DetectError>,
) -> std::io::Result<()> {
    let line = match verdict {
        Ok(v) => VerdictLine {
            timestamp,
            kind: match v.kind {
                VerdictKind::Authentic => "authentic",
                VerdictKind::GroundSpoof => "ground_spoof",
                VerdictKind::AircraftSpoof => "aircraft_spoof",
            },
            claimed: v.claimed,
            predicted: v.predicted,
            message_malicious_prob: Some(v.message_malicious_prob),
            aircraft_class_probs: v.aircraft_class_probs.as_deref(),
        },
        Err(DetectError::UnknownAircraft(_)) => VerdictLine {
            timestamp,
            kind: "unknown_aircraft",
            claimed,
            predicted: None,
            message_malicious_prob: None,
            aircraft_class_probs: None,
        },
        Err(e) => {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                e.to_string(),
            ))
        }
    };
    serde_json::to_writer(&mut *out, &line)?;
    out.write_all(b"\n")
}
