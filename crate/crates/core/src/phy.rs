//! Pulse-position modulation of 112-bit frames into complex baseband,
//! preamble search and energy-comparison demodulation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{IcaoAddress, RawFrame, FRAME_BITS};

pub const DEFAULT_SAMPLE_RATE: f64 = 2.0e6;
pub const ADSB_CARRIER_HZ: f64 = 1090.0e6;
pub const DEFAULT_DETECTION_THRESHOLD_DB: f64 = 6.0;

/// Minimum mean PPM contrast over the data block for a preamble hit to count.
const MIN_PPM_CONTRAST: f64 = 0.4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhyError {
    #[error("sample rate {0} Hz is not a positive integer multiple of 2 MHz")]
    SampleRate(f64),
    #[error("amplitude must be non-negative, got {0}")]
    Amplitude(f64),
    #[error("capture has {got} samples, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("IQ byte stream has odd length {0}")]
    OddLength(usize),
    #[error("manifest: {0}")]
    Manifest(String),
}

/// Fixed 1090ES pulse timing (microseconds).
pub struct PulseTiming;

impl PulseTiming {
    pub const BIT_PERIOD_US: f64 = 1.0;
    pub const HALF_BIT_US: f64 = 0.5;
    pub const PREAMBLE_PULSES_US: [f64; 4] = [0.0, 1.0, 3.5, 4.5];
    pub const PREAMBLE_US: f64 = 8.0;
    pub const MESSAGE_US: f64 = Self::PREAMBLE_US + FRAME_BITS as f64 * Self::BIT_PERIOD_US;

    /// Preamble pulse positions in half-bit chips.
    pub const PREAMBLE_PULSE_CHIPS: [usize; 4] = [0, 2, 7, 9];
    pub const PREAMBLE_CHIPS: usize = 16;
    pub const MESSAGE_CHIPS: usize = 240;

    /// Samples per 0.5 µs chip.
    pub fn chip_len(sample_rate: f64) -> Result<usize, PhyError> {
        let per_chip = sample_rate * Self::HALF_BIT_US * 1e-6;
        if !(per_chip >= 1.0) || per_chip.fract() != 0.0 {
            return Err(PhyError::SampleRate(sample_rate));
        }
        Ok(per_chip as usize)
    }

    pub fn message_len(sample_rate: f64) -> Result<usize, PhyError> {
        Ok(Self::chip_len(sample_rate)? * Self::MESSAGE_CHIPS)
    }
}

/// Ground-truth class of a capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Authentic transponder.
    A0,
    /// Message replay.
    A1,
    /// IQ data replay.
    A2,
    /// Ghost aircraft injection.
    A3,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::A0, Label::A1, Label::A2, Label::A3];
    pub const ATTACKS: [Label; 3] = [Label::A1, Label::A2, Label::A3];

    pub fn is_malicious(self) -> bool {
        self != Label::A0
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a0" => Some(Label::A0),
            "a1" => Some(Label::A1),
            "a2" => Some(Label::A2),
            "a3" => Some(Label::A3),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// What the synthesizers applied to a capture; informational only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImpairmentRecord {
    pub cfo_hz: f64,
    pub doppler_hz: f64,
    pub phase_rad: f64,
    pub gain: f64,
}

/// One message worth of complex baseband samples plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct IqCapture {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub carrier_hz: f64,
    pub label: Label,
    pub claimed_icao: IcaoAddress,
    pub truth_icao: Option<IcaoAddress>,
    pub timestamp: f64,
    pub impairments: ImpairmentRecord,
}

impl IqCapture {
    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, gain: f64) -> IqCapture {
        IqCapture {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            ..self.clone()
        }
    }
}

/// Pulse-position modulate a frame: the four preamble pulses, then one
/// 1 µs slot per bit with the pulse in the first half for 1, second half for 0.
pub fn modulate(frame: &RawFrame, sample_rate: f64, amplitude: f64) -> Result<IqCapture, PhyError> {
    let chip = PulseTiming::chip_len(sample_rate)?;
    if !(amplitude >= 0.0) {
        return Err(PhyError::Amplitude(amplitude));
    }
    let mut chips = [false; PulseTiming::MESSAGE_CHIPS];
    for c in PulseTiming::PREAMBLE_PULSE_CHIPS {
        chips[c] = true;
    }
    for (m, bit) in frame.bits().into_iter().enumerate() {
        let first = PulseTiming::PREAMBLE_CHIPS + 2 * m;
        chips[if bit { first } else { first + 1 }] = true;
    }
    let samples = chips
        .iter()
        .flat_map(|&on| {
            let v = if on { amplitude } else { 0.0 };
            std::iter::repeat_n(Complex64::new(v, 0.0), chip)
        })
        .collect();
    Ok(IqCapture {
        samples,
        sample_rate,
        carrier_hz: ADSB_CARRIER_HZ,
        label: Label::A0,
        claimed_icao: frame.icao(),
        truth_icao: None,
        timestamp: 0.0,
        impairments: ImpairmentRecord {
            gain: 1.0,
            ..Default::default()
        },
    })
}

fn chip_energies(
    mag: &[f64],
    start: usize,
    chip: usize,
    count: usize,
) -> impl Iterator<Item = f64> + '_ {
    (0..count).map(move |c| mag[start + c * chip..start + (c + 1) * chip].iter().sum())
}

/// Energy-comparison PPM demodulation of a capture aligned at its preamble.
pub fn demodulate(capture: &IqCapture) -> Result<RawFrame, PhyError> {
    let chip = PulseTiming::chip_len(capture.sample_rate)?;
    let expected = chip * PulseTiming::MESSAGE_CHIPS;
    if capture.samples.len() < expected {
        return Err(PhyError::Length {
            expected,
            got: capture.samples.len(),
        });
    }
    let mag: Vec<f64> = capture.samples[..expected]
        .iter()
        .map(|s| s.norm())
        .collect();
    let chips: Vec<f64> = chip_energies(&mag, 0, chip, PulseTiming::MESSAGE_CHIPS).collect();
    let bits: Vec<bool> = chips[PulseTiming::PREAMBLE_CHIPS..]
        .chunks_exact(2)
        .map(|pair| pair[0] > pair[1])
        .collect();
    Ok(RawFrame::from_bits(&bits).expect("112 bit slots"))
}

/// Locate message starts in a long sample stream.
///
/// A candidate offset scores the mean power of the four preamble pulse chips
/// against the mean power of the twelve quiet preamble chips, which serve as
/// the local noise-floor estimate. Offsets scoring at least `threshold_db`
/// whose data block also shows PPM structure survive, then non-maximum
/// suppression keeps the best offset within any one message length.
pub fn detect_preamble(
    stream: &[Complex64],
    sample_rate: f64,
    threshold_db: f64,
) -> Result<Vec<usize>, PhyError> {
    let chip = PulseTiming::chip_len(sample_rate)?;
    let msg_len = chip * PulseTiming::MESSAGE_CHIPS;
    if stream.len() < msg_len {
        return Ok(Vec::new());
    }
    let threshold = 10f64.powf(threshold_db / 10.0);
    let power: Vec<f64> = stream.iter().map(|s| s.norm_sqr()).collect();
    let mag: Vec<f64> = stream.iter().map(|s| s.norm()).collect();
    let is_pulse = |c: usize| PulseTiming::PREAMBLE_PULSE_CHIPS.contains(&c);

    let mut hits: Vec<(usize, f64)> = Vec::new();
    for start in 0..=stream.len() - msg_len {
        let (mut pulse, mut quiet) = (0.0, 0.0);
        for (c, e) in chip_energies(&power, start, chip, PulseTiming::PREAMBLE_CHIPS).enumerate() {
            if is_pulse(c) {
                pulse += e;
            } else {
                quiet += e;
            }
        }
        if pulse <= 0.0 {
            continue;
        }
        let pulse = pulse / 4.0;
        let quiet = quiet / 12.0;
        let score = pulse / (quiet + pulse * 1e-12);
        if score < threshold {
            continue;
        }
        let data_start = start + PulseTiming::PREAMBLE_CHIPS * chip;
        let energies: Vec<f64> = chip_energies(&mag, data_start, chip, 2 * FRAME_BITS).collect();
        let contrast = energies
            .chunks_exact(2)
            .map(|p| (p[0] - p[1]).abs() / (p[0] + p[1] + f64::MIN_POSITIVE))
            .sum::<f64>()
            / FRAME_BITS as f64;
        if contrast >= MIN_PPM_CONTRAST {
            hits.push((start, score));
        }
    }

    hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut kept: Vec<usize> = Vec::new();
    for (start, _) in hits {
        if kept.iter().all(|&k| k.abs_diff(start) >= msg_len) {
            kept.push(start);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{encode_frame, Capability, MePayload};

    fn frame() -> RawFrame {
        encode_frame(
            Capability::new(5).unwrap(),
            IcaoAddress::new(0xABCDEF).unwrap(),
            MePayload::new(0x1234_5678_9ABC).unwrap(),
        )
    }

    #[test]
    fn all_ones_layout() {
        let ones = RawFrame([0xFF; 14]);
        let cap = modulate(&ones, DEFAULT_SAMPLE_RATE, 0.7).unwrap();
        assert_eq!(cap.samples.len(), 240);
        for m in 0..112 {
            assert_eq!(cap.samples[16 + 2 * m], Complex64::new(0.7, 0.0));
            assert_eq!(cap.samples[17 + 2 * m], Complex64::new(0.0, 0.0));
        }
        let pulses: Vec<usize> = (0..16).filter(|&k| cap.samples[k].re > 0.0).collect();
        assert_eq!(pulses, vec![0, 2, 7, 9]);
    }

    #[test]
    fn higher_rates_scale_length() {
        let cap = modulate(&frame(), 8e6, 1.0).unwrap();
        assert_eq!(cap.samples.len(), 960);
        assert_eq!(demodulate(&cap).unwrap(), frame());
    }

    #[test]
    fn rejects_non_multiple_rates() {
        assert_eq!(
            modulate(&frame(), 2.4e6, 1.0),
            Err(PhyError::SampleRate(2.4e6))
        );
        assert!(modulate(&frame(), 1e6, 1.0).is_err());
    }

    #[test]
    fn zero_amplitude_is_silent_and_undetectable() {
        let cap = modulate(&frame(), DEFAULT_SAMPLE_RATE, 0.0).unwrap();
        assert!(cap.samples.iter().all(|s| *s == Complex64::new(0.0, 0.0)));
        assert!(detect_preamble(&cap.samples, DEFAULT_SAMPLE_RATE, 6.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn demodulation_ignores_rotation_and_gain() {
        let cap = modulate(&frame(), DEFAULT_SAMPLE_RATE, 1.0).unwrap();
        let rot = Complex64::from_polar(3.5, 2.1);
        let rotated = IqCapture {
            samples: cap.samples.iter().map(|s| s * rot).collect(),
            ..cap.clone()
        };
        assert_eq!(demodulate(&rotated).unwrap(), frame());
    }

    #[test]
    fn short_capture_is_rejected() {
        let mut cap = modulate(&frame(), DEFAULT_SAMPLE_RATE, 1.0).unwrap();
        cap.samples.truncate(100);
        assert!(matches!(demodulate(&cap), Err(PhyError::Length { .. })));
    }

    #[test]
    fn finds_message_in_silence() {
        let cap = modulate(&frame(), DEFAULT_SAMPLE_RATE, 1.0).unwrap();
        let mut stream = vec![Complex64::new(0.0, 0.0); 3000];
        stream[1000..1240].copy_from_slice(&cap.samples);
        assert_eq!(
            detect_preamble(&stream, DEFAULT_SAMPLE_RATE, 6.0).unwrap(),
            vec![1000]
        );
    }

    #[test]
    fn back_to_back_messages() {
        let cap = modulate(&frame(), DEFAULT_SAMPLE_RATE, 1.0).unwrap();
        let mut stream = vec![Complex64::new(0.0, 0.0); 100];
        stream.extend_from_slice(&cap.samples);
        stream.extend_from_slice(&cap.samples);
        stream.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), 50));
        assert_eq!(
            detect_preamble(&stream, DEFAULT_SAMPLE_RATE, 6.0).unwrap(),
            vec![100, 340]
        );
    }
}
