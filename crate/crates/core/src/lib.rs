//! Software re-creation of a desk-scale FMCW radar teaching kit.
//!
//! The kit pairs a STEMlab-class baseband board (two 125 MS/s, 14-bit ADCs
//! and DACs, controlled over SCPI) with a 24 GHz FMCW front end. This crate
//! provides every piece of that chain in software:
//!
//! * [`scpi`]: the line-oriented command dialect (parser and serializer).
//! * [`sim`]: physics model of VCO, prescaler, dechirp mixer and ADC.
//! * [`server`]: a TCP instrument emulator speaking the dialect.
//! * [`dsp`]: chirp characterization and range-Doppler processing.
//! * [`client`]: SCPI client plus the two experiment orchestrators.
//!
//! The numerical routines in [`dsp`] are generic over [`Real`] (`f32` or
//! `f64`); the aliases at the crate root fix the scalar to `f64`, which is
//! what the experiments use.

pub mod client;
pub mod dsp;
pub mod scalar;
pub mod scpi;
pub mod server;
pub mod sim;

pub use scalar::Real;

/// Propagation speed used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Samples per channel held by the generator and acquisition block RAM.
pub const BUFFER_SAMPLES: usize = 16384;

/// Native converter rate of the baseband board, samples per second.
pub const ADC_BASE_RATE: f64 = 125e6;

pub type StftConfig = dsp::StftConfig;
pub type Spectrogram = dsp::Spectrogram<f64>;
pub type InstFreqTrack = dsp::InstFreqTrack<f64>;
pub type LinearFit = dsp::LinearFit<f64>;
pub type RangeDopplerMap = dsp::RangeDopplerMap<f64>;
pub type RadarParams = dsp::RadarParams<f64>;
pub type Detection = dsp::Detection<f64>;
pub type Complex = num_complex::Complex<f64>;
