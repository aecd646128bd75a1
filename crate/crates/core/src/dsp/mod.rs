//! Signal-processing chains for the two experiments.
//!
//! Chirp characterization: [`stft`] → [`peak_interp_column`] per frame →
//! [`fit_linear_ramp`] → residuals. Chirp-sequence processing:
//! [`range_doppler`] → [`detect_peaks`] → physical units, plus
//! [`doa_phase_comparison`] for the two-channel front end.
//!
//! Everything here is generic over [`Real`](crate::Real).

mod detect;
mod doa;
pub mod export;
mod peak;
mod range_doppler;
mod regression;
mod stft;

pub use detect::{detect_peaks, Detection, PeakSearch};
pub use doa::doa_phase_comparison;
pub use peak::{parabolic_offset, peak_interp_column, PeakEstimate};
pub use range_doppler::{range_doppler, ChirpLayout, RadarParams, RangeDopplerMap};
pub use regression::{fit_linear_ramp, track_instantaneous_frequency, InstFreqTrack, LinearFit};
pub use stft::{stft, Spectrogram, StftConfig, Window};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DspError {
    #[error("input of {got} samples shorter than the required {need}")]
    TooShort { got: usize, need: usize },
    #[error("invalid STFT configuration: {0}")]
    InvalidConfig(String),
    #[error("all abscissae are equal; slope undefined")]
    DegenerateAbscissa,
    #[error("phase difference maps outside the unambiguous angle range (sin = {0})")]
    OutOfAngleRange(f64),
    #[error("element spacing {0} wavelengths exceeds the unambiguous 0.5")]
    AmbiguousSpacing(f64),
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),
}

/// Periodic Hann or rectangular taper of length `n`.
pub(crate) fn window_coefficients<T: crate::Real>(window: Window, n: usize) -> Vec<T> {
    match window {
        Window::Rect => vec![T::one(); n],
        Window::Hann => (0..n)
            .map(|i| {
                let x = T::TAU() * T::of_usize(i) / T::of_usize(n);
                T::of(0.5) - T::of(0.5) * x.cos()
            })
            .collect(),
    }
}
