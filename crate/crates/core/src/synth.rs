//! Authentic-fleet and attack synthesizers.
//!
//! Every capture draws its randomness from its own ChaCha stream keyed by
//! (master seed, capture index), so output does not depend on generation
//! order.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::frames::{
    decode_frame, encode_airborne_position, encode_airborne_velocity, encode_frame, AircraftState,
    Capability, IcaoAddress, RawFrame,
};
use crate::impairments::{
    apply_awgn, apply_carrier_leakage, apply_doppler_exact, apply_frequency_offset, apply_gain,
    closing_speed, doppler_alpha, doppler_shift, propagate, GeoPoint,
};
use crate::phy::{demodulate, modulate, IqCapture, Label, ADSB_CARRIER_HZ};
use crate::Error;

pub const RANDOM_DOPPLER_LIMIT_HZ: f64 = 1_000.0;
pub const RANDOM_CFO_LIMIT_HZ: f64 = 10_000.0;

const AIRBORNE_CAPABILITY: u8 = 5;

/// Independent RNG stream for one unit of work.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseOffset {
    /// Uniform over [0, 2π) per message.
    Uniform,
    Fixed(f64),
}

impl PhaseOffset {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            PhaseOffset::Uniform => rng.random_range(0.0..2.0 * PI),
            PhaseOffset::Fixed(p) => p,
        }
    }
}

/// PHY fingerprint of a transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransponderProfile {
    /// Mean carrier frequency offset, Hz.
    pub cfo_mean: f64,
    /// Per-message CFO standard deviation, Hz.
    pub cfo_jitter_sigma: f64,
    pub phase_offset: PhaseOffset,
    /// Pulse amplitude (full scale is 1.0).
    pub amplitude: f64,
    /// Relative per-message amplitude standard deviation.
    pub amplitude_jitter_sigma: f64,
    /// Carrier feed-through relative to peak amplitude.
    #[serde(default)]
    pub carrier_leakage: f64,
}

impl TransponderProfile {
    pub fn transponder(cfo_mean: f64, cfo_jitter_sigma: f64) -> Self {
        Self {
            cfo_mean,
            cfo_jitter_sigma,
            phase_offset: PhaseOffset::Uniform,
            amplitude: 0.5,
            amplitude_jitter_sigma: 0.02,
            carrier_leakage: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.amplitude > 0.0)
            || self.cfo_jitter_sigma < 0.0
            || self.amplitude_jitter_sigma < 0.0
        {
            return Err(Error::Config(format!(
                "invalid transponder profile {self:?}"
            )));
        }
        Ok(())
    }

    fn draw_cfo<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.cfo_mean + gaussian(rng, self.cfo_jitter_sigma)
    }

    fn draw_amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (self.amplitude * (1.0 + gaussian(rng, self.amplitude_jitter_sigma)))
            .max(self.amplitude * 0.1)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DopplerMode {
    None,
    /// Computed from the (claimed) aircraft kinematics.
    Calculated,
    /// Uniform over ±1 kHz.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfoMode {
    None,
    /// Uniform over ±10 kHz, on top of the radio's own offset.
    Random,
}

/// The five Doppler / CFO combinations an attacker may synthesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DopplerCase {
    I,
    Ii,
    Iii,
    Iv,
    V,
}

impl DopplerCase {
    pub fn modes(self) -> (DopplerMode, CfoMode) {
        match self {
            DopplerCase::I => (DopplerMode::None, CfoMode::None),
            DopplerCase::Ii => (DopplerMode::Calculated, CfoMode::None),
            DopplerCase::Iii => (DopplerMode::Calculated, CfoMode::Random),
            DopplerCase::Iv => (DopplerMode::Random, CfoMode::None),
            DopplerCase::V => (DopplerMode::Random, CfoMode::Random),
        }
    }

    pub fn parse(s: &str) -> Option<DopplerCase> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Some(DopplerCase::I),
            "ii" | "2" => Some(DopplerCase::Ii),
            "iii" | "3" => Some(DopplerCase::Iii),
            "iv" | "4" => Some(DopplerCase::Iv),
            "v" | "5" => Some(DopplerCase::V),
            _ => None,
        }
    }
}

/// An SDR-based ground spoofer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpooferProfile {
    pub radio: TransponderProfile,
    pub doppler_mode: DopplerMode,
    pub cfo_mode: CfoMode,
    /// Each attack message is transmitted once per gain.
    pub gains: Vec<f64>,
}

impl SpooferProfile {
    pub fn with_case(mut self, case: DopplerCase) -> Self {
        (self.doppler_mode, self.cfo_mode) = case.modes();
        self
    }

    /// Default attacker radio: small oscillator offset, uncalibrated LO
    /// leakage at about -10.5 dBc, three transmit gains.
    pub fn sdr_default() -> Self {
        Self {
            radio: TransponderProfile {
                cfo_mean: 3_000.0,
                cfo_jitter_sigma: 500.0,
                phase_offset: PhaseOffset::Uniform,
                amplitude: 0.5,
                amplitude_jitter_sigma: 0.02,
                carrier_leakage: 0.3,
            },
            doppler_mode: DopplerMode::None,
            cfo_mode: CfoMode::None,
            gains: vec![1.0, 0.8, 0.6],
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.radio.validate()?;
        if self.gains.is_empty() || self.gains.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::Config(
                "spoofer gains must be non-empty and positive".into(),
            ));
        }
        Ok(())
    }

    fn draw_offsets<R: Rng + ?Sized>(&self, calculated_doppler: f64, rng: &mut R) -> (f64, f64) {
        let doppler = match self.doppler_mode {
            DopplerMode::None => 0.0,
            DopplerMode::Calculated => calculated_doppler,
            DopplerMode::Random => {
                rng.random_range(-RANDOM_DOPPLER_LIMIT_HZ..=RANDOM_DOPPLER_LIMIT_HZ)
            }
        };
        let cfo = self.radio.draw_cfo(rng)
            + match self.cfo_mode {
                CfoMode::None => 0.0,
                CfoMode::Random => rng.random_range(-RANDOM_CFO_LIMIT_HZ..=RANDOM_CFO_LIMIT_HZ),
            };
        (cfo, doppler)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub station: GeoPoint,
    pub sample_rate: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            snr_db: 20.0,
            station: GeoPoint {
                latitude: 40.4237,
                longitude: -86.9212,
                altitude: 200.0,
            },
            sample_rate: crate::phy::DEFAULT_SAMPLE_RATE,
        }
    }
}

/// A level, constant-heading flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub icao: IcaoAddress,
    pub start: AircraftState,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> AircraftState {
        propagate(&self.start, t - self.start.timestamp)
    }

    /// Draw a trajectory: speed ~ N(230, 10) m/s (redrawn while nonpositive),
    /// altitude ~ N(9000, 500) m, heading ~ U[0, 360), starting 20–150 km
    /// from the station on a uniform bearing.
    pub fn sample<R: Rng + ?Sized>(
        icao: IcaoAddress,
        station: &GeoPoint,
        rng: &mut R,
    ) -> Trajectory {
        let speed_dist = Normal::new(230.0, 10.0).unwrap();
        let alt_dist = Normal::new(9000.0, 500.0).unwrap();
        let ground_speed = loop {
            let v: f64 = speed_dist.sample(rng);
            if v > 0.0 {
                break v;
            }
        };
        let altitude = loop {
            let a: f64 = alt_dist.sample(rng);
            if crate::frames::encode_altitude(a).is_ok() {
                break a;
            }
        };
        let heading = rng.random_range(0.0..360.0);
        let bearing = rng.random_range(0.0..360.0);
        let range = rng.random_range(20_000.0..150_000.0);
        let p = station.offset(bearing, range);
        Trajectory {
            icao,
            start: AircraftState {
                latitude: p.latitude,
                longitude: p.longitude,
                altitude,
                ground_speed,
                heading,
                timestamp: 0.0,
            },
        }
    }
}

/// Ghost aircraft use the same kinematic distributions as [`Trajectory::sample`].
pub type GhostTrajectory = Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleetMember {
    pub profile: TransponderProfile,
    pub trajectory: Trajectory,
}

impl FleetMember {
    pub fn icao(&self) -> IcaoAddress {
        self.trajectory.icao
    }
}

/// `n` distinct random ICAO addresses, excluding `taken`.
pub fn random_icaos<R: Rng + ?Sized>(
    n: usize,
    taken: &BTreeSet<IcaoAddress>,
    rng: &mut R,
) -> Vec<IcaoAddress> {
    let mut seen = taken.clone();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let icao = IcaoAddress::new(rng.random_range(1..=IcaoAddress::MAX)).unwrap();
        if seen.insert(icao) {
            out.push(icao);
        }
    }
    out
}

/// A fleet whose CFO means are evenly spaced over ±`cfo_spread` Hz.
pub fn spread_fleet<R: Rng + ?Sized>(
    size: usize,
    cfo_spread: f64,
    cfo_jitter: f64,
    station: &GeoPoint,
    rng: &mut R,
) -> Vec<FleetMember> {
    let icaos = random_icaos(size, &BTreeSet::new(), rng);
    icaos
        .into_iter()
        .enumerate()
        .map(|(i, icao)| {
            let cfo_mean = if size == 1 {
                0.0
            } else {
                -cfo_spread + 2.0 * cfo_spread * i as f64 / (size - 1) as f64
            };
            FleetMember {
                profile: TransponderProfile::transponder(cfo_mean, cfo_jitter),
                trajectory: Trajectory::sample(icao, station, rng),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MessageKind {
    Position { odd: bool },
    Velocity,
}

fn kinematic_frame(
    icao: IcaoAddress,
    state: &AircraftState,
    kind: MessageKind,
) -> Result<RawFrame, Error> {
    let me = match kind {
        MessageKind::Position { odd } => encode_airborne_position(state, odd)?,
        MessageKind::Velocity => encode_airborne_velocity(state)?,
    };
    Ok(encode_frame(
        Capability::new(AIRBORNE_CAPABILITY)?,
        icao,
        me,
    ))
}

/// One message per aircraft per second, cycling even position, velocity,
/// odd position, velocity. Each message gets the aircraft's CFO plus jitter,
/// geometric Doppler (time-scaling model), a random phase, amplitude jitter
/// and channel noise.
pub fn synth_authentic<R: Rng + ?Sized>(
    fleet: &[FleetMember],
    duration: f64,
    channel: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<IqCapture>, Error> {
    if fleet.is_empty() {
        return Err(Error::Config("fleet must not be empty".into()));
    }
    for m in fleet {
        m.profile.validate()?;
    }
    let master = rng.next_u64();
    let seconds = duration.max(0.0).floor() as usize;
    let mut out = Vec::with_capacity(seconds * fleet.len());
    for sec in 0..seconds {
        let kind = match sec % 4 {
            0 => MessageKind::Position { odd: false },
            2 => MessageKind::Position { odd: true },
            _ => MessageKind::Velocity,
        };
        for (a, member) in fleet.iter().enumerate() {
            let mut rng = stream_rng(master, (sec * fleet.len() + a) as u64);
            let t = sec as f64;
            let state = member.trajectory.state_at(t);
            let frame = kinematic_frame(member.icao(), &state, kind)?;
            let p = &member.profile;
            let base = modulate(&frame, channel.sample_rate, p.draw_amplitude(&mut rng))?;
            let base = apply_carrier_leakage(&base, p.carrier_leakage);
            let alpha = doppler_alpha(0.0, closing_speed(&channel.station, &state));
            let shifted = apply_doppler_exact(&base, alpha);
            let cfo = p.draw_cfo(&mut rng);
            let phase = p.phase_offset.draw(&mut rng);
            let mut cap = apply_awgn(
                &apply_frequency_offset(&shifted, cfo, phase),
                channel.snr_db,
                &mut rng,
            )?;
            cap.label = Label::A0;
            cap.claimed_icao = member.icao();
            cap.truth_icao = Some(member.icao());
            cap.timestamp = t;
            out.push(cap);
        }
    }
    Ok(out)
}

/// A frame the attacker recorded, with the Doppler it observed at the time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedFrame {
    pub frame: RawFrame,
    pub doppler_hz: f64,
    pub timestamp: f64,
}

impl RecordedFrame {
    /// Demodulate and parity-check an authentic capture. Frames that fail
    /// the parity check are not usable for replay.
    pub fn from_capture(capture: &IqCapture) -> Option<RecordedFrame> {
        let frame = demodulate(capture).ok()?;
        decode_frame(&frame).ok()?;
        Some(RecordedFrame {
            frame,
            doppler_hz: capture.impairments.doppler_hz,
            timestamp: capture.timestamp,
        })
    }
}

impl From<RawFrame> for RecordedFrame {
    fn from(frame: RawFrame) -> Self {
        RecordedFrame {
            frame,
            doppler_hz: 0.0,
            timestamp: 0.0,
        }
    }
}

/// Transmit one zero-phase modulated frame through the spoofer radio,
/// once per gain.
fn spoof_transmit(
    frame: &RawFrame,
    calculated_doppler: f64,
    spoofer: &SpooferProfile,
    channel: &ChannelParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<IqCapture>, Error> {
    let radio = &spoofer.radio;
    let base = modulate(frame, channel.sample_rate, radio.draw_amplitude(rng))?;
    let base = apply_carrier_leakage(&base, radio.carrier_leakage);
    let (cfo, doppler) = spoofer.draw_offsets(calculated_doppler, rng);
    let phase = radio.phase_offset.draw(rng);
    let mut tx = apply_frequency_offset(&base, cfo + doppler, phase);
    tx.impairments.cfo_hz = cfo;
    tx.impairments.doppler_hz = doppler;
    spoofer
        .gains
        .iter()
        .map(|&g| Ok(apply_awgn(&apply_gain(&tx, g), channel.snr_db, rng)?))
        .collect()
}

/// Message replay: decoded frames re-modulated from zero phase and sent
/// through the spoofer radio.
pub fn synth_message_replay<R: Rng + ?Sized>(
    recorded: &[RecordedFrame],
    spoofer: &SpooferProfile,
    channel: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<IqCapture>, Error> {
    spoofer.validate()?;
    let master = rng.next_u64();
    let mut out = Vec::with_capacity(recorded.len() * spoofer.gains.len());
    for (i, rec) in recorded.iter().enumerate() {
        let mut rng = stream_rng(master, i as u64);
        for mut cap in spoof_transmit(&rec.frame, rec.doppler_hz, spoofer, channel, &mut rng)? {
            cap.label = Label::A1;
            cap.claimed_icao = rec.frame.icao();
            cap.truth_icao = None;
            cap.timestamp = rec.timestamp;
            out.push(cap);
        }
    }
    Ok(out)
}

/// IQ data replay: the recorded samples re-transmitted by the spoofer.
///
/// With `worst_case` the samples reach the station untouched except for
/// fresh channel noise, one copy per source capture.
pub fn synth_iq_replay<R: Rng + ?Sized>(
    authentic: &[IqCapture],
    spoofer: &SpooferProfile,
    channel: &ChannelParams,
    worst_case: bool,
    rng: &mut R,
) -> Result<Vec<IqCapture>, Error> {
    spoofer.validate()?;
    let master = rng.next_u64();
    let mut out = Vec::new();
    for (i, src) in authentic.iter().enumerate() {
        let mut rng = stream_rng(master, i as u64);
        let copies = if worst_case {
            vec![apply_awgn(src, channel.snr_db, &mut rng)?]
        } else {
            let radio = &spoofer.radio;
            let leaked = apply_carrier_leakage(src, radio.carrier_leakage);
            let (cfo, _) = spoofer.draw_offsets(0.0, &mut rng);
            let phase = radio.phase_offset.draw(&mut rng);
            let tx = apply_frequency_offset(&leaked, cfo, phase);
            spoofer
                .gains
                .iter()
                .map(|&g| apply_awgn(&apply_gain(&tx, g), channel.snr_db, &mut rng))
                .collect::<Result<Vec<_>, _>>()?
        };
        for mut cap in copies {
            cap.label = Label::A2;
            cap.claimed_icao = src.claimed_icao;
            cap.truth_icao = None;
            cap.timestamp = src.timestamp;
            out.push(cap);
        }
    }
    Ok(out)
}

/// Ghost aircraft injection: `n_aircraft` fabricated flights, each sending a
/// position and a velocity message every second.
pub fn synth_ghost_injection<R: Rng + ?Sized>(
    n_aircraft: usize,
    duration: f64,
    spoofer: &SpooferProfile,
    channel: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<IqCapture>, Error> {
    let ghosts = sample_ghosts(n_aircraft, &BTreeSet::new(), &channel.station, rng)?;
    synth_ghost_flights(&ghosts, duration, spoofer, channel, rng)
}

pub fn sample_ghosts<R: Rng + ?Sized>(
    n_aircraft: usize,
    avoid: &BTreeSet<IcaoAddress>,
    station: &GeoPoint,
    rng: &mut R,
) -> Result<Vec<GhostTrajectory>, Error> {
    if n_aircraft == 0 {
        return Err(Error::Config(
            "ghost injection needs at least one aircraft".into(),
        ));
    }
    let icaos = random_icaos(n_aircraft, avoid, rng);
    Ok(icaos
        .into_iter()
        .map(|icao| Trajectory::sample(icao, station, rng))
        .collect())
}

pub fn synth_ghost_flights<R: Rng + ?Sized>(
    ghosts: &[GhostTrajectory],
    duration: f64,
    spoofer: &SpooferProfile,
    channel: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<IqCapture>, Error> {
    spoofer.validate()?;
    let master = rng.next_u64();
    let seconds = duration.max(0.0).floor() as usize;
    let mut out = Vec::new();
    for sec in 0..seconds {
        let t = sec as f64;
        for (g, ghost) in ghosts.iter().enumerate() {
            let state = ghost.state_at(t);
            let doppler = doppler_shift(ADSB_CARRIER_HZ, closing_speed(&channel.station, &state));
            let kinds = [
                MessageKind::Position { odd: sec % 2 == 1 },
                MessageKind::Velocity,
            ];
            for (j, kind) in kinds.into_iter().enumerate() {
                let mut rng = stream_rng(master, ((sec * ghosts.len() + g) * 2 + j) as u64);
                let frame = kinematic_frame(ghost.icao, &state, kind)?;
                for mut cap in spoof_transmit(&frame, doppler, spoofer, channel, &mut rng)? {
                    cap.label = Label::A3;
                    cap.claimed_icao = ghost.icao;
                    cap.truth_icao = None;
                    cap.timestamp = t;
                    out.push(cap);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::demodulate;

    fn quiet_channel() -> ChannelParams {
        ChannelParams {
            snr_db: f64::INFINITY,
            ..Default::default()
        }
    }

    fn clean_spoofer() -> SpooferProfile {
        SpooferProfile {
            radio: TransponderProfile {
                cfo_mean: 0.0,
                cfo_jitter_sigma: 0.0,
                phase_offset: PhaseOffset::Uniform,
                amplitude: 0.5,
                amplitude_jitter_sigma: 0.0,
                carrier_leakage: 0.0,
            },
            doppler_mode: DopplerMode::None,
            cfo_mode: CfoMode::None,
            gains: vec![1.0],
        }
    }

    fn constant_phase(cap: &IqCapture) -> bool {
        let on: Vec<f64> = cap
            .samples
            .iter()
            .filter(|s| s.norm() > 1e-9)
            .map(|s| s.arg())
            .collect();
        on.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12)
    }

    #[test]
    fn zero_duration_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = ChannelParams::default();
        let fleet = spread_fleet(2, 1000.0, 10.0, &ch.station, &mut rng);
        assert!(synth_authentic(&fleet, 0.0, &ch, &mut rng)
            .unwrap()
            .is_empty());
        assert!(synth_authentic(&[], 5.0, &ch, &mut rng).is_err());
    }

    #[test]
    fn authentic_metadata() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = ChannelParams::default();
        let fleet = spread_fleet(3, 1000.0, 10.0, &ch.station, &mut rng);
        let caps = synth_authentic(&fleet, 4.0, &ch, &mut rng).unwrap();
        assert_eq!(caps.len(), 12);
        for c in &caps {
            assert_eq!(c.label, Label::A0);
            assert_eq!(Some(c.claimed_icao), c.truth_icao);
            assert_eq!(c.samples.len(), 240);
        }
    }

    #[test]
    fn replay_without_offsets_has_constant_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = quiet_channel();
        let fleet = spread_fleet(1, 0.0, 0.0, &ch.station, &mut rng);
        let auth = synth_authentic(&fleet, 3.0, &ch, &mut rng).unwrap();
        let rec: Vec<RecordedFrame> = auth
            .iter()
            .filter_map(RecordedFrame::from_capture)
            .collect();
        assert_eq!(rec.len(), 3);
        let caps = synth_message_replay(&rec, &clean_spoofer(), &ch, &mut rng).unwrap();
        for (c, r) in caps.iter().zip(&rec) {
            assert!(constant_phase(c));
            assert_eq!(demodulate(c).unwrap(), r.frame);
            assert_eq!(c.label, Label::A1);
        }
    }

    #[test]
    fn gain_sweep_only_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ch = quiet_channel();
        let mut sp = SpooferProfile::sdr_default().with_case(DopplerCase::V);
        sp.gains = vec![1.0, 0.5, 0.25];
        let f = kinematic_frame(
            IcaoAddress::new(0xA0B0C0).unwrap(),
            &Trajectory::sample(IcaoAddress::new(1).unwrap(), &ch.station, &mut rng).start,
            MessageKind::Velocity,
        )
        .unwrap();
        let caps = synth_message_replay(&[f.into()], &sp, &ch, &mut rng).unwrap();
        assert_eq!(caps.len(), 3);
        for (c, g) in caps.iter().zip([1.0, 0.5, 0.25]) {
            for (a, b) in c.samples.iter().zip(&caps[0].samples) {
                assert!((a - b * g).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn worst_case_iq_replay_is_identity_without_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = quiet_channel();
        let fleet = spread_fleet(2, 5000.0, 100.0, &ch.station, &mut rng);
        let auth = synth_authentic(&fleet, 2.0, &ch, &mut rng).unwrap();
        let rep =
            synth_iq_replay(&auth, &SpooferProfile::sdr_default(), &ch, true, &mut rng).unwrap();
        assert_eq!(rep.len(), auth.len());
        for (r, a) in rep.iter().zip(&auth) {
            assert_eq!(r.samples, a.samples);
            assert_eq!(r.label, Label::A2);
            assert_eq!(r.claimed_icao, a.claimed_icao);
        }
    }

    #[test]
    fn ghost_case_i_has_constant_phase_and_cadence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = quiet_channel();
        let caps = synth_ghost_injection(
            3,
            4.0,
            &clean_spoofer().with_case(DopplerCase::I),
            &ch,
            &mut rng,
        )
        .unwrap();
        assert_eq!(caps.len(), 3 * 4 * 2);
        assert!(caps.iter().all(constant_phase));
        assert!(caps.iter().all(|c| c.label == Label::A3));
        assert!(synth_ghost_injection(0, 4.0, &clean_spoofer(), &ch, &mut rng).is_err());
    }

    #[test]
    fn synthesis_is_deterministic() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let ch = ChannelParams::default();
            let fleet = spread_fleet(2, 5000.0, 100.0, &ch.station, &mut rng);
            synth_authentic(&fleet, 3.0, &ch, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn doppler_case_parsing() {
        assert_eq!(DopplerCase::parse("iii"), Some(DopplerCase::Iii));
        assert_eq!(DopplerCase::parse("V"), Some(DopplerCase::V));
        assert_eq!(DopplerCase::parse("vi"), None);
        assert_eq!(
            DopplerCase::Iv.modes(),
            (DopplerMode::Random, CfoMode::None)
        );
    }
}
