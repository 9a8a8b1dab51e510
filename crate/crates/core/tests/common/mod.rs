#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use soda::frames::IcaoAddress;
use soda::phy::{ImpairmentRecord, IqCapture, Label, ADSB_CARRIER_HZ};

/// Mode S generator x^24 + ... + 1 written out as 25 coefficients.
const GENERATOR: &str = "1111111111111010000001001";

/// Bitwise polynomial long division of the data followed by 24 zeros.
pub fn crc_oracle(data: &[bool]) -> u32 {
    let g: Vec<bool> = GENERATOR.chars().map(|c| c == '1').collect();
    let mut msg: Vec<bool> = data.to_vec();
    msg.extend(std::iter::repeat_n(false, 24));
    for i in 0..data.len() {
        if msg[i] {
            for (j, &gj) in g.iter().enumerate() {
                msg[i + j] ^= gj;
            }
        }
    }
    msg[data.len()..]
        .iter()
        .fold(0, |acc, &b| acc << 1 | b as u32)
}

pub fn nl_oracle(lat: f64) -> f64 {
    let lat = lat.abs();
    if lat >= 87.0 {
        return if lat == 87.0 { 2.0 } else { 1.0 };
    }
    let nz = 15.0;
    let x = 1.0 - (1.0 - (PI / (2.0 * nz)).cos()) / (PI / 180.0 * lat).cos().powi(2);
    (2.0 * PI / x.acos()).floor()
}

fn md(a: f64, b: f64) -> f64 {
    a - b * (a / b).floor()
}

/// Globally unambiguous airborne decode of an even/odd pair, position taken
/// from the even message. `None` when the two latitudes sit in different
/// longitude-zone bands.
pub fn cpr_global_decode(even: (u32, u32), odd: (u32, u32)) -> Option<(f64, f64)> {
    let s = 131_072.0;
    let (ye, xe) = (even.0 as f64 / s, even.1 as f64 / s);
    let (yo, xo) = (odd.0 as f64 / s, odd.1 as f64 / s);
    let j = (59.0 * ye - 60.0 * yo + 0.5).floor();
    let mut lat_e = 360.0 / 60.0 * (md(j, 60.0) + ye);
    let mut lat_o = 360.0 / 59.0 * (md(j, 59.0) + yo);
    if lat_e >= 270.0 {
        lat_e -= 360.0;
    }
    if lat_o >= 270.0 {
        lat_o -= 360.0;
    }
    if nl_oracle(lat_e) != nl_oracle(lat_o) {
        return None;
    }
    let nl = nl_oracle(lat_e);
    let ni = nl.max(1.0);
    let m = (xe * (nl - 1.0) - xo * nl + 0.5).floor();
    let mut lon = 360.0 / ni * (md(m, ni) + xe);
    if lon >= 180.0 {
        lon -= 360.0;
    }
    Some((lat_e, lon))
}

/// 12-bit Q=1 altitude field to feet.
pub fn altitude_oracle(field: u64) -> f64 {
    assert_eq!(field & 0x10, 0x10, "Q bit");
    let n = (field & 0xFE0) >> 1 | field & 0x0F;
    n as f64 * 25.0 - 1000.0
}

/// Subtype-1 velocity ME to signed (east, north) knots.
pub fn velocity_oracle(me: u64) -> (f64, f64) {
    assert_eq!(me >> 51, 19);
    assert_eq!(me >> 48 & 0x7, 1);
    let comp = |sign: u64, v: u64| {
        let mag = v as f64 - 1.0;
        if sign == 1 {
            -mag
        } else {
            mag
        }
    };
    let east = comp(me >> 42 & 1, me >> 32 & 0x3FF);
    let north = comp(me >> 31 & 1, me >> 21 & 0x3FF);
    (east, north)
}

/// Scalar Adam written straight from the update equations.
pub struct ScalarAdam {
    pub lr: f64,
    pub b1: f64,
    pub b2: f64,
    pub eps: f64,
    m: f64,
    v: f64,
    t: i32,
}

impl ScalarAdam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            b1: 0.9,
            b2: 0.999,
            eps: 1e-8,
            m: 0.0,
            v: 0.0,
            t: 0,
        }
    }

    pub fn step(&mut self, w: f64, g: f64) -> f64 {
        self.t += 1;
        self.m = self.b1 * self.m + (1.0 - self.b1) * g;
        self.v = self.b2 * self.v + (1.0 - self.b2) * g * g;
        let mh = self.m / (1.0 - self.b1.powi(self.t));
        let vh = self.v / (1.0 - self.b2.powi(self.t));
        w - self.lr * mh / (vh.sqrt() + self.eps)
    }
}

/// Phase of each sample, unwrapped.
pub fn unwrapped_phase(samples: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for s in samples {
        let p = s.arg();
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

pub fn mean_phase_increment(samples: &[Complex64]) -> f64 {
    let u = unwrapped_phase(samples);
    (u[u.len() - 1] - u[0]) / (u.len() - 1) as f64
}

/// 240 unit-magnitude samples at 2 MHz.
pub fn constant_capture(n: usize) -> IqCapture {
    IqCapture {
        samples: vec![Complex64::new(1.0, 0.0); n],
        sample_rate: 2e6,
        carrier_hz: ADSB_CARRIER_HZ,
        label: Label::A0,
        claimed_icao: IcaoAddress::new(1).unwrap(),
        truth_icao: None,
        timestamp: 0.0,
        impairments: ImpairmentRecord::default(),
    }
}
