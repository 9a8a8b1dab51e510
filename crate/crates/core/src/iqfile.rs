//! RTL-SDR style interleaved unsigned-byte IQ files and the JSON-lines
//! manifest that sits next to them.
//!
//! Each component `x` in [-1, 1] is stored as `round(127.5 + 127.5 x)`
//! clamped to [0, 255], I first then Q, and read back as `(b - 127.5) / 127.5`.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::frames::IcaoAddress;
use crate::phy::{ImpairmentRecord, IqCapture, Label, PhyError, ADSB_CARRIER_HZ};

const MID: f64 = 127.5;

fn quantize(x: f64) -> u8 {
    (MID + MID * x).round().clamp(0.0, 255.0) as u8
}

fn dequantize(b: u8) -> f64 {
    (b as f64 - MID) / MID
}

pub fn encode_iq(samples: &[Complex64]) -> Vec<u8> {
    samples
        .iter()
        .flat_map(|s| [quantize(s.re), quantize(s.im)])
        .collect()
}

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex64>, PhyError> {
    if !bytes.len().is_multiple_of(2) {
        return Err(PhyError::OddLength(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(2)
        .map(|p| Complex64::new(dequantize(p[0]), dequantize(p[1])))
        .collect())
}

/// One manifest line per capture in the IQ file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Byte offset of the capture's first I byte.
    pub offset: u64,
    pub samples: usize,
    pub sample_rate: f64,
    pub label: Label,
    pub claimed_icao: IcaoAddress,
    pub truth_icao: Option<IcaoAddress>,
    pub timestamp: f64,
}

/// Append captures to `out` back to back, returning their manifest records.
pub fn write_iq_file<W: Write>(
    captures: &[IqCapture],
    mut out: W,
) -> std::io::Result<Vec<ManifestRecord>> {
    let mut offset = 0u64;
    let mut records = Vec::with_capacity(captures.len());
    for c in captures {
        let bytes = encode_iq(&c.samples);
        out.write_all(&bytes)?;
        records.push(ManifestRecord {
            offset,
            samples: c.samples.len(),
            sample_rate: c.sample_rate,
            label: c.label,
            claimed_icao: c.claimed_icao,
            truth_icao: c.truth_icao,
            timestamp: c.timestamp,
        });
        offset += bytes.len() as u64;
    }
    Ok(records)
}

pub fn write_manifest<W: Write>(records: &[ManifestRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_manifest<R: BufRead>(input: R) -> Result<Vec<ManifestRecord>, PhyError> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| PhyError::Manifest(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| PhyError::Manifest(format!("line {}: {e}", n + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Rebuild captures from raw IQ bytes and their manifest.
pub fn read_captures(
    bytes: &[u8],
    manifest: &[ManifestRecord],
) -> Result<Vec<IqCapture>, PhyError> {
    if !bytes.len().is_multiple_of(2) {
        return Err(PhyError::OddLength(bytes.len()));
    }
    manifest
        .iter()
        .map(|r| {
            let start = r.offset as usize;
            let end = start + 2 * r.samples;
            let slice = bytes.get(start..end).ok_or_else(|| {
                PhyError::Manifest(format!(
                    "record at offset {} runs past end of IQ data",
                    r.offset
                ))
            })?;
            Ok(IqCapture {
                samples: decode_iq(slice)?,
                sample_rate: r.sample_rate,
                carrier_hz: ADSB_CARRIER_HZ,
                label: r.label,
                claimed_icao: r.claimed_icao,
                truth_icao: r.truth_icao,
                timestamp: r.timestamp,
                impairments: ImpairmentRecord::default(),
            })
        })
        .collect()
}
