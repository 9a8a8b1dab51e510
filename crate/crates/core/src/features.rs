//! Classifier inputs: interleaved IQ samples for the message classifier and
//! per-sample phases for the aircraft classifier.

use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::IcaoAddress;
use crate::phy::{IqCapture, Label, PulseTiming};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("capture has {got} samples, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("capture is all zeros")]
    DegenerateSignal,
    #[error("feature file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Iq,
    Phase,
}

impl FeatureKind {
    /// Feature width for a message sampled at `sample_rate`.
    pub fn width(self, sample_rate: f64) -> Option<usize> {
        let n = PulseTiming::message_len(sample_rate).ok()?;
        Some(match self {
            FeatureKind::Iq => 2 * n,
            FeatureKind::Phase => n,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IqFeatureVector(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFeatureVector(pub Vec<f64>);

fn check_shape(capture: &IqCapture) -> Result<(), FeatureError> {
    let expected =
        PulseTiming::message_len(capture.sample_rate).map_err(|_| FeatureError::Shape {
            expected: 0,
            got: capture.samples.len(),
        })?;
    if capture.samples.len() != expected {
        return Err(FeatureError::Shape {
            expected,
            got: capture.samples.len(),
        });
    }
    Ok(())
}

/// (i0, q0, i1, q1, ...), divided by the largest absolute component when
/// `normalize` is set.
pub fn extract_iq_features(
    capture: &IqCapture,
    normalize: bool,
) -> Result<IqFeatureVector, FeatureError> {
    check_shape(capture)?;
    let mut v: Vec<f64> = capture.samples.iter().flat_map(|s| [s.re, s.im]).collect();
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return Err(FeatureError::DegenerateSignal);
    }
    if normalize {
        v.iter_mut().for_each(|x| *x /= peak);
    }
    Ok(IqFeatureVector(v))
}

/// Wrapped per-sample phase atan2(q, i); exact zeros map to 0.
pub fn extract_phase_features(capture: &IqCapture) -> Result<PhaseFeatureVector, FeatureError> {
    check_shape(capture)?;
    if capture.samples.iter().all(|s| s.re == 0.0 && s.im == 0.0) {
        return Err(FeatureError::DegenerateSignal);
    }
    Ok(PhaseFeatureVector(
        capture
            .samples
            .iter()
            .map(|s| {
                let p = s.im.atan2(s.re);
                // atan2 returns -π for (negative, -0.0); keep the range (-π, π].
                if p == -std::f64::consts::PI {
                    std::f64::consts::PI
                } else {
                    p
                }
            })
            .collect(),
    ))
}

pub fn extract(
    capture: &IqCapture,
    kind: FeatureKind,
    normalize_iq: bool,
) -> Result<Vec<f64>, FeatureError> {
    Ok(match kind {
        FeatureKind::Iq => extract_iq_features(capture, normalize_iq)?.0,
        FeatureKind::Phase => extract_phase_features(capture)?.0,
    })
}

/// Row-per-message feature matrix with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub kind: FeatureKind,
    pub normalized: bool,
    pub sample_rate: f64,
    pub x: Array2<f64>,
    pub labels: Vec<Label>,
    pub claimed_icao: Vec<IcaoAddress>,
    pub truth_icao: Vec<Option<IcaoAddress>>,
}

impl FeatureTable {
    pub fn from_captures(
        captures: &[IqCapture],
        kind: FeatureKind,
        normalize_iq: bool,
    ) -> Result<Self, FeatureError> {
        let sample_rate = captures
            .first()
            .map(|c| c.sample_rate)
            .unwrap_or(crate::phy::DEFAULT_SAMPLE_RATE);
        let width = kind.width(sample_rate).ok_or(FeatureError::Shape {
            expected: 0,
            got: 0,
        })?;
        let mut data = Vec::with_capacity(captures.len() * width);
        for c in captures {
            let row = extract(c, kind, normalize_iq)?;
            if row.len() != width {
                return Err(FeatureError::Shape {
                    expected: width,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self {
            kind,
            normalized: kind == FeatureKind::Iq && normalize_iq,
            sample_rate,
            x: Array2::from_shape_vec((captures.len(), width), data).expect("row-major shape"),
            labels: captures.iter().map(|c| c.label).collect(),
            claimed_icao: captures.iter().map(|c| c.claimed_icao).collect(),
            truth_icao: captures.iter().map(|c| c.truth_icao).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn select(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            kind: self.kind,
            normalized: self.normalized,
            sample_rate: self.sample_rate,
            x: self.x.select(ndarray::Axis(0), rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            claimed_icao: rows.iter().map(|&r| self.claimed_icao[r]).collect(),
            truth_icao: rows.iter().map(|&r| self.truth_icao[r]).collect(),
        }
    }
}

const MAGIC: &[u8; 8] = b"SODAFEAT";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    rows: usize,
    cols: usize,
    kind: FeatureKind,
    normalized: bool,
    sample_rate: f64,
    labels: Vec<Label>,
    claimed_icao: Vec<IcaoAddress>,
    truth_icao: Vec<Option<IcaoAddress>>,
}

/// Binary tensor file: magic, version (u32 LE), header length (u32 LE),
/// JSON header record, then rows × cols f64 little-endian in row order.
pub fn write_feature_table<W: Write>(table: &FeatureTable, mut out: W) -> std::io::Result<()> {
    let header = Header {
        rows: table.x.nrows(),
        cols: table.x.ncols(),
        kind: table.kind,
        normalized: table.normalized,
        sample_rate: table.sample_rate,
        labels: table.labels.clone(),
        claimed_icao: table.claimed_icao.clone(),
        truth_icao: table.truth_icao.clone(),
    };
    let header = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;
    for v in table.x.iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_feature_table<R: Read>(mut input: R) -> Result<FeatureTable, FeatureError> {
    let fmt = |e: std::io::Error| FeatureError::Format(e.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(fmt)?;
    if &magic != MAGIC {
        return Err(FeatureError::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(fmt)?;
    if u32::from_le_bytes(word) != VERSION {
        return Err(FeatureError::Format("unsupported version".into()));
    }
    input.read_exact(&mut word).map_err(fmt)?;
    let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
    input.read_exact(&mut header).map_err(fmt)?;
    let h: Header =
        serde_json::from_slice(&header).map_err(|e| FeatureError::Format(e.to_string()))?;
    if h.labels.len() != h.rows || h.claimed_icao.len() != h.rows || h.truth_icao.len() != h.rows {
        return Err(FeatureError::Format(
            "label columns disagree with row count".into(),
        ));
    }
    let mut body = vec![0u8; h.rows * h.cols * 8];
    input.read_exact(&mut body).map_err(fmt)?;
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(FeatureTable {
        kind: h.kind,
        normalized: h.normalized,
        sample_rate: h.sample_rate,
        x: Array2::from_shape_vec((h.rows, h.cols), data)
            .map_err(|e| FeatureError::Format(e.to_string()))?,
        labels: h.labels,
        claimed_icao: h.claimed_icao,
        truth_icao: h.truth_icao,
    })
}
