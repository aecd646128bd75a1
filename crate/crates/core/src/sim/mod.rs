//! Physics model of the analog chain: tuning voltage → VCO → scene →
//! dechirp mixer (IQ or dual real) → band limiting → 14-bit ADC, plus the
//! ÷8192 prescaler output of the IVS-947.

mod adc;
mod channel;
mod front_end;
mod ramp;
mod scene;

pub use adc::{on_adc_grid, quantize_adc, Capture, Decimation, ADC_BITS, ADC_FULL_SCALE, ADC_LSB, ANALOG_CUTOFF_HZ};
pub use channel::{
    acquire_prescaler, instantaneous_rf_frequency, prescaler_analog, prescaler_output, simulate_rx, simulate_rx_analog,
    PRESCALER_AMPLITUDE,
};
pub use front_end::{FrontEndKind, FrontEndModel, F_BASE, K_VCO, PRESCALER_RATIO, TUNE_ANCHOR_V};
pub use ramp::{Drive, Playback, RampMode, RfProfile, TuningRamp};
pub use scene::{PointTarget, Scene, SceneFile};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{requested} samples exceed the 16384-sample buffer")]
    BufferOverflow { requested: usize },
    #[error("invalid ramp: {0}")]
    InvalidRamp(String),
    #[error("t = {t} s outside ramp duration {duration} s")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("decimation {0} not in {{1, 8, 64, 1024, 8192, 65536}}")]
    InvalidDecimation(u32),
    #[error("invalid front end: {0}")]
    InvalidFrontEnd(String),
    #[error("unknown front end {0:?}")]
    UnknownFrontEnd(String),
    #[error("front end {0} has no prescaler output")]
    NoPrescaler(FrontEndKind),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("scene file: {0}")]
    SceneFile(String),
    #[error("invalid capture: {0}")]
    InvalidCapture(String),
}

#[cfg(test)]
mod tests;
