//! Channel and transmitter impairments on baseband captures: carrier
//! frequency offset, Doppler, carrier leakage, gain and AWGN. Also the small
//! amount of geodesy needed to compute Doppler from aircraft kinematics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::AircraftState;
use crate::phy::IqCapture;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const EARTH_RADIUS: f64 = 6_371_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImpairmentError {
    #[error("capture has zero signal power")]
    DegenerateSignal,
}

/// Multiply sample k by exp(j(2π Δf k Ts + Δφ)).
pub fn apply_frequency_offset(capture: &IqCapture, delta_f: f64, delta_phi: f64) -> IqCapture {
    let step = 2.0 * PI * delta_f / capture.sample_rate;
    let samples = capture
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| s * Complex64::cis(step * k as f64 + delta_phi))
        .collect();
    let mut out = IqCapture {
        samples,
        ..capture.clone()
    };
    out.impairments.cfo_hz += delta_f;
    out.impairments.phase_rad += delta_phi;
    out
}

/// Doppler factor α = (c + v_o)/(c − v_s) − 1 for observer and source speeds
/// measured positive toward each other.
pub fn doppler_alpha(observer_velocity: f64, source_velocity: f64) -> f64 {
    (SPEED_OF_LIGHT + observer_velocity) / (SPEED_OF_LIGHT - source_velocity) - 1.0
}

/// Frequency shift seen by a static receiver when the transmitter closes at
/// `radial_velocity` m/s (negative when receding).
pub fn doppler_shift(carrier: f64, radial_velocity: f64) -> f64 {
    doppler_alpha(0.0, radial_velocity) * carrier
}

/// Time-scaling Doppler model: the passband signal becomes
/// (1+α) s_p((1+α) t), which at baseband is the envelope resampled at
/// (1+α) k Ts, scaled by (1+α) and rotated by exp(j 2π f_c α k Ts).
///
/// Resampling is linear interpolation; the output keeps the input length and
/// reads zero past the final input sample.
pub fn apply_doppler_exact(capture: &IqCapture, alpha: f64) -> IqCapture {
    let n = capture.samples.len();
    let ts = capture.sample_period();
    let zero = Complex64::new(0.0, 0.0);
    let at = |i: usize| capture.samples.get(i).copied().unwrap_or(zero);
    let samples = (0..n)
        .map(|k| {
            let pos = (1.0 + alpha) * k as f64;
            let i = pos.floor();
            let frac = pos - i;
            let i = i as usize;
            let env = at(i) * (1.0 - frac) + at(i + 1) * frac;
            let carrier_phase = 2.0 * PI * capture.carrier_hz * alpha * k as f64 * ts;
            env * (1.0 + alpha) * Complex64::cis(carrier_phase)
        })
        .collect();
    let mut out = IqCapture {
        samples,
        ..capture.clone()
    };
    out.impairments.doppler_hz += alpha * capture.carrier_hz;
    out
}

/// Add complex white Gaussian noise so that the capture's mean power over
/// the noise power equals 10^(snr_db/10). `snr_db = +inf` returns the input.
pub fn apply_awgn<R: Rng + ?Sized>(
    capture: &IqCapture,
    snr_db: f64,
    rng: &mut R,
) -> Result<IqCapture, ImpairmentError> {
    if snr_db == f64::INFINITY {
        return Ok(capture.clone());
    }
    let power = capture.mean_power();
    if !(power > 0.0) {
        return Err(ImpairmentError::DegenerateSignal);
    }
    let sigma = (power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
    let samples = capture
        .samples
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(IqCapture {
        samples,
        ..capture.clone()
    })
}

/// Constant carrier feed-through at `level` times the capture's peak
/// magnitude. Pulsed transponders have none; direct-conversion SDR
/// transmitters leak their local oscillator between pulses.
pub fn apply_carrier_leakage(capture: &IqCapture, level: f64) -> IqCapture {
    if level == 0.0 {
        return capture.clone();
    }
    let peak = capture.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let leak = Complex64::new(level * peak, 0.0);
    IqCapture {
        samples: capture.samples.iter().map(|s| s + leak).collect(),
        ..capture.clone()
    }
}

pub fn apply_gain(capture: &IqCapture, gain: f64) -> IqCapture {
    let mut out = capture.scaled(gain);
    out.impairments.gain *= gain;
    out
}

/// Geodetic position on a spherical earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
    /// Meters.
    pub altitude: f64,
}

impl GeoPoint {
    pub fn ecef(&self) -> [f64; 3] {
        let r = EARTH_RADIUS + self.altitude;
        let (lat, lon) = (self.latitude.to_radians(), self.longitude.to_radians());
        [
            r * lat.cos() * lon.cos(),
            r * lat.cos() * lon.sin(),
            r * lat.sin(),
        ]
    }

    /// Point reached after travelling `distance` meters along `bearing` degrees.
    pub fn offset(&self, bearing: f64, distance: f64) -> GeoPoint {
        let delta = distance / EARTH_RADIUS;
        let (lat1, lon1, brg) = (
            self.latitude.to_radians(),
            self.longitude.to_radians(),
            bearing.to_radians(),
        );
        let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * brg.cos()).asin();
        let lon2 = lon1
            + (brg.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * lat2.sin());
        GeoPoint {
            latitude: lat2.to_degrees(),
            longitude: wrap_longitude(lon2.to_degrees()),
            altitude: self.altitude,
        }
    }
}

pub fn wrap_longitude(lon: f64) -> f64 {
    let w = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

fn enu_to_ecef(lat: f64, lon: f64, e: f64, n: f64, u: f64) -> [f64; 3] {
    let (lat, lon) = (lat.to_radians(), lon.to_radians());
    [
        -lon.sin() * e - lat.sin() * lon.cos() * n + lat.cos() * lon.cos() * u,
        lon.cos() * e - lat.sin() * lon.sin() * n + lat.cos() * lon.sin() * u,
        lat.cos() * n + lat.sin() * u,
    ]
}

/// Speed at which the aircraft closes on the station (m/s, negative when
/// receding), assuming level flight.
pub fn closing_speed(station: &GeoPoint, state: &AircraftState) -> f64 {
    let ac = GeoPoint {
        latitude: state.latitude,
        longitude: state.longitude,
        altitude: state.altitude,
    }
    .ecef();
    let st = station.ecef();
    let los: Vec<f64> = (0..3).map(|i| st[i] - ac[i]).collect();
    let range = los.iter().map(|v| v * v).sum::<f64>().sqrt();
    if range == 0.0 {
        return 0.0;
    }
    let (ve, vn) = state.velocity_en();
    let v = enu_to_ecef(state.latitude, state.longitude, ve, vn, 0.0);
    (0..3).map(|i| v[i] * los[i]).sum::<f64>() / range
}

/// Dead-reckon a level, constant-heading flight forward by `dt` seconds.
pub fn propagate(state: &AircraftState, dt: f64) -> AircraftState {
    let start = GeoPoint {
        latitude: state.latitude,
        longitude: state.longitude,
        altitude: state.altitude,
    };
    let p = start.offset(state.heading, state.ground_speed * dt);
    AircraftState {
        latitude: p.latitude,
        longitude: p.longitude,
        timestamp: state.timestamp + dt,
        ..*state
    }
}
