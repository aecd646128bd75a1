use std::fmt;

use super::SimError;
use crate::{ADC_BASE_RATE, BUFFER_SAMPLES};

/// Converter resolution in bits.
pub const ADC_BITS: u32 = 14;

/// Full-scale input, V (symmetric).
pub const ADC_FULL_SCALE: f64 = 1.0;

/// Quantization step: full range 2 V over 2^14 steps.
pub const ADC_LSB: f64 = 2.0 * ADC_FULL_SCALE / (1u32 << ADC_BITS) as f64;

/// Analog anti-alias filter corner of the converter inputs, Hz.
pub const ANALOG_CUTOFF_HZ: f64 = 50e6;

/// Clips to ±1 V and rounds to the nearest multiple of the LSB
/// (half away from zero). Zero and both rails lie on the grid.
pub fn quantize_adc(v: f64) -> f64 {
    if v.is_nan() {
        return 0.0;
    }
    let clipped = v.clamp(-ADC_FULL_SCALE, ADC_FULL_SCALE);
    (clipped / ADC_LSB).round() * ADC_LSB
}

/// True when `v` is one of the converter output levels.
pub fn on_adc_grid(v: f64) -> bool {
    let k = v / ADC_LSB;
    v.abs() <= ADC_FULL_SCALE && k == k.round()
}

/// Allowed acquisition decimation factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimation(u32);

impl Decimation {
    pub const ALLOWED: [u32; 6] = [1, 8, 64, 1024, 8192, 65536];

    pub fn new(d: u32) -> Result<Self, SimError> {
        if Self::ALLOWED.contains(&d) {
            Ok(Self(d))
        } else {
            Err(SimError::InvalidDecimation(d))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn sample_rate(self) -> f64 {
        ADC_BASE_RATE / f64::from(self.0)
    }

    /// Passband edge of the acquisition chain: the analog corner or the
    /// decimated Nyquist frequency, whichever is lower.
    pub fn cutoff(self) -> f64 {
        (self.sample_rate() / 2.0).min(ANALOG_CUTOFF_HZ)
    }
}

impl Default for Decimation {
    fn default() -> Self {
        Self(1)
    }
}

impl fmt::Display for Decimation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One acquisition: one or two channels of quantized samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Capture {
    channels: Vec<Vec<f64>>,
    sample_rate: f64,
    decimation: Decimation,
    trigger_offset: usize,
}

impl Capture {
    /// Quantizes analog channel data into a capture.
    pub fn from_analog(analog: Vec<Vec<f64>>, decimation: Decimation) -> Result<Self, SimError> {
        let channels = analog.into_iter().map(|ch| ch.into_iter().map(quantize_adc).collect()).collect();
        Self::new(channels, decimation)
    }

    /// Wraps already-quantized samples, checking the capture invariants.
    pub fn new(channels: Vec<Vec<f64>>, decimation: Decimation) -> Result<Self, SimError> {
        if channels.is_empty() || channels.len() > 2 {
            return Err(SimError::InvalidCapture(format!("{} channels", channels.len())));
        }
        for ch in &channels {
            if ch.len() > BUFFER_SAMPLES {
                return Err(SimError::BufferOverflow { requested: ch.len() });
            }
            if let Some(v) = ch.iter().find(|v| !on_adc_grid(**v)) {
                return Err(SimError::InvalidCapture(format!("sample {v} is off the ADC grid")));
            }
        }
        Ok(Self { channels, sample_rate: decimation.sample_rate(), decimation, trigger_offset: 0 })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> Option<&[f64]> {
        self.channels.get(i).map(Vec::as_slice)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn decimation(&self) -> Decimation {
        self.decimation
    }

    /// Sample index that coincides with generator time zero.
    pub fn trigger_offset(&self) -> usize {
        self.trigger_offset
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Combined I + jQ samples of a two-channel capture.
    pub fn iq(&self) -> Option<Vec<num_complex::Complex<f64>>> {
        let [i, q] = self.channels.as_slice() else { return None };
        Some(i.iter().zip(q).map(|(&re, &im)| num_complex::Complex::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantizer_examples() {
        assert_eq!(quantize_adc(0.0), 0.0);
        assert_eq!(quantize_adc(2.5), 1.0);
        assert_eq!(quantize_adc(-7.0), -1.0);
        assert_eq!(quantize_adc(f64::NAN), 0.0);
        // exactly half an LSB rounds away from zero
        assert_eq!(quantize_adc(ADC_LSB / 2.0), ADC_LSB);
        assert_eq!(quantize_adc(-ADC_LSB / 2.0), -ADC_LSB);
        assert_eq!(ADC_LSB, 1.0 / 8192.0);
    }

    #[test]
    fn quantizer_error_bound_over_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let v: f64 = rng.random_range(-1.0..1.0);
            let q = quantize_adc(v);
            assert!((q - v).abs() <= ADC_LSB / 2.0 + 1e-15, "{v} -> {q}");
            assert!(on_adc_grid(q));
            // nearest: neither neighbor level is closer
            assert!((q + ADC_LSB - v).abs() >= (q - v).abs() - 1e-15);
            assert!((q - ADC_LSB - v).abs() >= (q - v).abs() - 1e-15);
        }
        let q = quantize_adc(0.3);
        assert!((q - 0.3).abs() <= ADC_LSB / 2.0);
    }

    #[test]
    fn decimation_ladder() {
        assert_eq!(Decimation::new(8).unwrap().sample_rate(), 15.625e6);
        assert!((Decimation::new(1024).unwrap().sample_rate() - 122070.3125).abs() < 1e-9);
        assert!(Decimation::new(7).is_err());
        assert_eq!(Decimation::new(1).unwrap().cutoff(), 50e6);
    }

    #[test]
    fn capture_invariants() {
        let d = Decimation::new(8).unwrap();
        assert!(Capture::new(vec![vec![0.1]], d).is_err());
        assert!(Capture::new(vec![], d).is_err());
        assert!(Capture::new(vec![vec![0.0; BUFFER_SAMPLES + 1]], d).is_err());
        let c = Capture::from_analog(vec![vec![0.1, 3.0], vec![-0.2, 0.0]], d).unwrap();
        assert_eq!(c.channel(0).unwrap()[1], 1.0);
        assert_eq!(c.trigger_offset(), 0);
        assert_eq!(c.iq().unwrap().len(), 2);
    }
}
