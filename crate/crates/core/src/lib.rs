//! SODA: detecting spoofed ADS-B messages from their physical-layer
//! fingerprint.
//!
//! A message classifier looks at the raw IQ samples of each 1090ES burst and
//! flags ground-based spoofers. An aircraft classifier then predicts which
//! transponder sent the message from its phase pattern and compares that
//! with the ICAO address the message claims.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detector;
pub mod eval;
pub mod features;
pub mod frames;
pub mod impairments;
pub mod iqfile;
pub mod nn;
pub mod phy;
pub mod scenario;
pub mod synth;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Frame(#[from] frames::FrameError),
    #[error(transparent)]
    Phy(#[from] phy::PhyError),
    #[error(transparent)]
    Impairment(#[from] impairments::ImpairmentError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Nn(#[from] nn::NnError),
    #[error(transparent)]
    Detect(#[from] detector::DetectError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
