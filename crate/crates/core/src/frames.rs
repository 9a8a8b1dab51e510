//! 1090ES extended squitter (DF17) frames: bit layout, CRC-24 parity and
//! the airborne position / velocity ME payloads used by the synthesizers.
//!
//! Bit order is MSB-first everywhere, which is also the over-the-air order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FRAME_BITS: usize = 112;
pub const FRAME_BYTES: usize = FRAME_BITS / 8;
pub const DATA_BITS: usize = 88;
pub const DF_EXTENDED_SQUITTER: u8 = 17;

/// Mode S generator polynomial without the implicit x^24 term.
pub const CRC24_GENERATOR: u32 = 0xFFF409;

const FEET_PER_METER: f64 = 1.0 / 0.3048;
const KNOTS_PER_MPS: f64 = 3600.0 / 1852.0;

const CPR_NZ: f64 = 15.0;
const CPR_SCALE: f64 = 131_072.0; // 2^17

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("expected {expected} bits, got {got}")]
    InputSize { expected: usize, got: usize },
    #[error("parity mismatch: computed {computed:06X}, stored {stored:06X}")]
    Parity { computed: u32, stored: u32 },
    #[error("unsupported downlink format {0}")]
    UnsupportedFormat(u8),
    #[error("{field} out of range: {value}")]
    Range { field: &'static str, value: f64 },
    #[error("invalid hex frame: {0}")]
    Hex(String),
}

/// 24-bit ICAO aircraft address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IcaoAddress(u32);

impl IcaoAddress {
    pub const MAX: u32 = (1 << 24) - 1;

    pub fn new(value: u32) -> Result<Self, FrameError> {
        if value > Self::MAX {
            return Err(FrameError::Range {
                field: "icao",
                value: value as f64,
            });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for IcaoAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:06X}", self.0)
    }
}

impl FromStr for IcaoAddress {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = u32::from_str_radix(s.trim(), 16).map_err(|_| FrameError::Hex(s.to_string()))?;
        Self::new(v)
    }
}

impl Serialize for IcaoAddress {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IcaoAddress {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Transponder capability field (3 bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Capability(u8);

impl Capability {
    pub fn new(value: u8) -> Result<Self, FrameError> {
        if value > 7 {
            return Err(FrameError::Range {
                field: "capability",
                value: value as f64,
            });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// 56-bit ME (message, extended squitter) payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MePayload(u64);

impl MePayload {
    pub const MAX: u64 = (1 << 56) - 1;

    pub fn new(value: u64) -> Result<Self, FrameError> {
        if value > Self::MAX {
            return Err(FrameError::Range {
                field: "me",
                value: value as f64,
            });
        }
        Ok(Self(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn type_code(self) -> TypeCode {
        TypeCode((self.0 >> 51) as u8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeCode(pub u8);

impl TypeCode {
    pub const VELOCITY: TypeCode = TypeCode(19);
    /// Airborne position with barometric altitude, as emitted by the encoder.
    pub const AIRBORNE_POSITION: TypeCode = TypeCode(11);

    pub fn is_airborne_position(self) -> bool {
        (9..=18).contains(&self.0)
    }
}

/// A packed 112-bit frame as transmitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawFrame(pub [u8; FRAME_BYTES]);

impl RawFrame {
    pub fn from_bits(bits: &[bool]) -> Result<Self, FrameError> {
        if bits.len() != FRAME_BITS {
            return Err(FrameError::InputSize {
                expected: FRAME_BITS,
                got: bits.len(),
            });
        }
        Ok(Self(pack_bits::<FRAME_BYTES>(bits)))
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn bits(&self) -> [bool; FRAME_BITS] {
        std::array::from_fn(|i| self.bit(i))
    }

    pub fn flip_bit(&mut self, i: usize) {
        self.0[i / 8] ^= 1 << (7 - i % 8);
    }

    pub fn downlink_format(&self) -> u8 {
        self.0[0] >> 3
    }

    pub fn icao(&self) -> IcaoAddress {
        IcaoAddress(u32::from_be_bytes([0, self.0[1], self.0[2], self.0[3]]))
    }

    /// Parity stored in the last 24 bits.
    pub fn stored_parity(&self) -> u32 {
        u32::from_be_bytes([0, self.0[11], self.0[12], self.0[13]])
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02X}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self, FrameError> {
        let s = s.trim();
        if s.len() != FRAME_BYTES * 2 || !s.is_ascii() {
            return Err(FrameError::Hex(s.to_string()));
        }
        let mut out = [0u8; FRAME_BYTES];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16)
                .map_err(|_| FrameError::Hex(s.to_string()))?;
        }
        Ok(Self(out))
    }
}

impl fmt::Display for RawFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn pack_bits<const N: usize>(bits: &[bool]) -> [u8; N] {
    let mut out = [0u8; N];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (7 - i % 8);
        }
    }
    out
}

const CRC_TABLE: [u32; 256] = crc_table();

const fn crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = (i as u32) << 16;
        let mut j = 0;
        while j < 8 {
            c = if c & 0x80_0000 != 0 {
                (c << 1) ^ CRC24_GENERATOR
            } else {
                c << 1
            };
            j += 1;
        }
        table[i] = c & 0xFF_FFFF;
        i += 1;
    }
    table
}

fn crc24_bytes(data: &[u8]) -> u32 {
    data.iter().fold(0u32, |rem, &byte| {
        ((rem << 8) & 0xFF_FFFF) ^ CRC_TABLE[((rem >> 16) as u8 ^ byte) as usize]
    })
}

/// CRC-24 of the 88 data bits of an extended squitter.
pub fn crc24(data_bits: &[bool]) -> Result<u32, FrameError> {
    if data_bits.len() != DATA_BITS {
        return Err(FrameError::InputSize {
            expected: DATA_BITS,
            got: data_bits.len(),
        });
    }
    Ok(crc24_bytes(&pack_bits::<11>(data_bits)))
}

/// A decoded DF17 extended squitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdsbFrame {
    pub downlink_format: u8,
    pub capability: Capability,
    pub icao: IcaoAddress,
    pub me: MePayload,
    pub parity: u32,
}

impl AdsbFrame {
    pub fn encode(&self) -> RawFrame {
        encode_frame(self.capability, self.icao, self.me)
    }
}

/// DF17 ‖ CA ‖ ICAO ‖ ME ‖ parity.
pub fn encode_frame(capability: Capability, icao: IcaoAddress, me: MePayload) -> RawFrame {
    let mut bytes = [0u8; FRAME_BYTES];
    bytes[0] = DF_EXTENDED_SQUITTER << 3 | capability.0;
    bytes[1..4].copy_from_slice(&icao.0.to_be_bytes()[1..]);
    bytes[4..11].copy_from_slice(&me.0.to_be_bytes()[1..]);
    let parity = crc24_bytes(&bytes[..11]);
    bytes[11..].copy_from_slice(&parity.to_be_bytes()[1..]);
    RawFrame(bytes)
}

pub fn decode_frame(frame: &RawFrame) -> Result<AdsbFrame, FrameError> {
    let df = frame.downlink_format();
    if df != DF_EXTENDED_SQUITTER {
        return Err(FrameError::UnsupportedFormat(df));
    }
    let computed = crc24_bytes(&frame.0[..11]);
    let stored = frame.stored_parity();
    if computed != stored {
        return Err(FrameError::Parity { computed, stored });
    }
    let mut me = [0u8; 8];
    me[1..].copy_from_slice(&frame.0[4..11]);
    Ok(AdsbFrame {
        downlink_format: df,
        capability: Capability(frame.0[0] & 0x07),
        icao: frame.icao(),
        me: MePayload(u64::from_be_bytes(me)),
        parity: stored,
    })
}

/// Kinematic state of an aircraft (ground truth for the synthesizers).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftState {
    pub latitude: f64,
    pub longitude: f64,
    /// Meters above mean sea level.
    pub altitude: f64,
    /// Meters per second.
    pub ground_speed: f64,
    /// Degrees clockwise from true north, in [0, 360).
    pub heading: f64,
    pub timestamp: f64,
}

impl AircraftState {
    pub fn validate(&self) -> Result<(), FrameError> {
        if !(self.latitude.abs() <= 90.0) {
            return Err(FrameError::Range {
                field: "latitude",
                value: self.latitude,
            });
        }
        if !(-180.0..180.0).contains(&self.longitude) {
            return Err(FrameError::Range {
                field: "longitude",
                value: self.longitude,
            });
        }
        if !(0.0..360.0).contains(&self.heading) {
            return Err(FrameError::Range {
                field: "heading",
                value: self.heading,
            });
        }
        if !(self.ground_speed >= 0.0) {
            return Err(FrameError::Range {
                field: "ground_speed",
                value: self.ground_speed,
            });
        }
        Ok(())
    }

    /// East and north velocity components in m/s.
    pub fn velocity_en(&self) -> (f64, f64) {
        let h = self.heading.to_radians();
        (self.ground_speed * h.sin(), self.ground_speed * h.cos())
    }
}

/// 12-bit barometric altitude field with the Q bit set (25 ft increments).
pub fn encode_altitude(altitude_m: f64) -> Result<u16, FrameError> {
    let feet = altitude_m * FEET_PER_METER;
    let n = ((feet + 1000.0) / 25.0).round();
    if !(0.0..=2047.0).contains(&n) {
        return Err(FrameError::Range {
            field: "altitude",
            value: altitude_m,
        });
    }
    let n = n as u16;
    Ok((n & 0x7F0) << 1 | 0x10 | (n & 0x0F))
}

/// Number of longitude zones for a latitude, NZ = 15.
pub fn cpr_nl(lat: f64) -> u32 {
    let lat = lat.abs();
    if lat == 0.0 {
        return 59;
    }
    if lat == 87.0 {
        return 2;
    }
    if lat > 87.0 {
        return 1;
    }
    let a = 1.0 - (PI / (2.0 * CPR_NZ)).cos();
    let b = (PI / 180.0 * lat).cos().powi(2);
    (2.0 * PI / (1.0 - a / b).acos()).floor() as u32
}

fn modulo(x: f64, y: f64) -> f64 {
    x - y * (x / y).floor()
}

/// 17-bit CPR latitude/longitude for the even (`odd = false`) or odd format.
pub fn cpr_encode(lat: f64, lon: f64, odd: bool) -> (u32, u32) {
    let i = if odd { 1.0 } else { 0.0 };
    let dlat = 360.0 / (4.0 * CPR_NZ - i);
    let yz = (CPR_SCALE * modulo(lat, dlat) / dlat + 0.5).floor();
    let rlat = dlat * (yz / CPR_SCALE + (lat / dlat).floor());
    let nl = cpr_nl(rlat) as f64;
    let dlon = 360.0 / (nl - i).max(1.0);
    let xz = (CPR_SCALE * modulo(lon, dlon) / dlon + 0.5).floor();
    let mask = (1u32 << 17) - 1;
    ((yz as u32) & mask, (xz as u32) & mask)
}

/// Airborne position ME (TC 11): altitude, CPR format flag and 17-bit lat/lon.
pub fn encode_airborne_position(
    state: &AircraftState,
    cpr_odd: bool,
) -> Result<MePayload, FrameError> {
    state.validate()?;
    let alt = encode_altitude(state.altitude)? as u64;
    let (lat, lon) = cpr_encode(state.latitude, state.longitude, cpr_odd);
    let me = (TypeCode::AIRBORNE_POSITION.0 as u64) << 51
        | alt << 36
        | (cpr_odd as u64) << 34
        | (lat as u64) << 17
        | lon as u64;
    Ok(MePayload(me))
}

/// Airborne velocity ME (TC 19, subtype 1: subsonic ground speed).
pub fn encode_airborne_velocity(state: &AircraftState) -> Result<MePayload, FrameError> {
    state.validate()?;
    let speed_kt = state.ground_speed * KNOTS_PER_MPS;
    if speed_kt >= 1022.0 {
        return Err(FrameError::Range {
            field: "ground_speed",
            value: state.ground_speed,
        });
    }
    let (east, north) = state.velocity_en();
    let component = |v_mps: f64| -> (u64, u64) {
        let kt = v_mps * KNOTS_PER_MPS;
        let magnitude = kt.abs().round() as u64 + 1;
        ((kt < 0.0 && magnitude > 1) as u64, magnitude)
    };
    let (west, v_ew) = component(east);
    let (south, v_ns) = component(north);
    let me = (TypeCode::VELOCITY.0 as u64) << 51
        | 1 << 48
        | west << 42
        | v_ew << 32
        | south << 31
        | v_ns << 21
        | 1 << 10; // vertical rate field: 0 ft/min
    Ok(MePayload(me))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_frame() -> RawFrame {
        encode_frame(
            Capability::new(5).unwrap(),
            IcaoAddress::new(0x4840D6).unwrap(),
            MePayload::new(0x58_C3_82_D6_90_C8_AC).unwrap(),
        )
    }

    #[test]
    fn zero_data_has_zero_crc() {
        assert_eq!(crc24(&[false; DATA_BITS]).unwrap(), 0);
    }

    #[test]
    fn crc_rejects_wrong_length() {
        assert_eq!(
            crc24(&[false; 87]),
            Err(FrameError::InputSize {
                expected: 88,
                got: 87
            })
        );
    }

    #[test]
    fn known_frame_from_the_air() {
        // Widely published DF17 airborne position example.
        let frame = RawFrame::from_hex("8D40621D58C382D690C8AC2863A7").unwrap();
        let decoded = decode_frame(&frame).unwrap();
        assert_eq!(decoded.icao.value(), 0x40621D);
        assert_eq!(decoded.me.type_code(), TypeCode(11));
        assert_eq!(decoded.encode(), frame);
    }

    #[test]
    fn all_zero_payload_layout() {
        let f = encode_frame(
            Capability::default(),
            IcaoAddress::new(0).unwrap(),
            MePayload::default(),
        );
        let bits = f.bits();
        assert_eq!(&bits[..5], &[true, false, false, false, true]);
        assert_eq!(f.stored_parity(), crc24(&bits[..88]).unwrap());
    }

    #[test]
    fn max_icao_sets_all_ones() {
        let f = encode_frame(
            Capability::default(),
            IcaoAddress::new(IcaoAddress::MAX).unwrap(),
            MePayload::default(),
        );
        assert!(f.bits()[8..32].iter().all(|&b| b));
        assert_eq!(decode_frame(&f).unwrap().icao.value(), IcaoAddress::MAX);
        assert!(IcaoAddress::new(1 << 24).is_err());
    }

    #[test]
    fn me_bit_flip_is_parity_error() {
        let mut f = sample_frame();
        f.flip_bit(40);
        assert!(matches!(decode_frame(&f), Err(FrameError::Parity { .. })));
    }

    #[test]
    fn df11_is_unsupported() {
        let mut f = sample_frame();
        f.0[0] = 11 << 3;
        assert_eq!(decode_frame(&f), Err(FrameError::UnsupportedFormat(11)));
    }

    #[test]
    fn single_bit_errors_always_detected() {
        let f = sample_frame();
        for i in 0..FRAME_BITS {
            let mut g = f;
            g.flip_bit(i);
            assert!(decode_frame(&g).is_err(), "bit {i}");
        }
    }

    #[test]
    fn hex_round_trip() {
        let f = sample_frame();
        assert_eq!(f.to_hex().len(), 28);
        assert_eq!(RawFrame::from_hex(&f.to_hex()).unwrap(), f);
        assert!(RawFrame::from_hex("8D40").is_err());
    }

    #[test]
    fn origin_maps_to_zero_lat_bin() {
        assert_eq!(cpr_encode(0.0, 0.0, false), (0, 0));
    }

    #[test]
    fn nl_boundaries() {
        assert_eq!(cpr_nl(0.0), 59);
        assert_eq!(cpr_nl(87.0), 2);
        assert_eq!(cpr_nl(-88.0), 1);
        assert_eq!(cpr_nl(52.2572021484375), 36);
    }

    #[test]
    fn altitude_out_of_range() {
        assert!(encode_altitude(20_000.0).is_err());
        assert!(encode_altitude(-500.0).is_err());
    }

    #[test]
    fn speed_overflow() {
        let s = AircraftState {
            latitude: 0.0,
            longitude: 0.0,
            altitude: 1000.0,
            ground_speed: 600.0,
            heading: 10.0,
            timestamp: 0.0,
        };
        assert!(matches!(
            encode_airborne_velocity(&s),
            Err(FrameError::Range { .. })
        ));
    }
}
