use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use super::{ClientError, DEFAULT_TIMEOUT};
use crate::dsp::{ChirpLayout, PeakSearch, StftConfig};
use crate::server::{Routing, DEFAULT_PORT};
use crate::sim::{Decimation, FrontEndKind};
use crate::{ADC_BASE_RATE, BUFFER_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Single upsweep observed through the prescaler.
    ChirpChar,
    /// Chirp sequence, range-Doppler processing.
    ChirpSeq,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ChirpChar => "chirp_char",
            Self::ChirpSeq => "chirp_seq",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "chirp_char" => Ok(Self::ChirpChar),
            "chirp_seq" => Ok(Self::ChirpSeq),
            _ => Err(format!("unknown experiment {s:?}")),
        }
    }
}

/// Everything one experiment run needs. The constructors give the
/// reference parameter sets; every field may be overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub host: String,
    pub port: u16,
    pub timeout: Duration,
    pub experiment: Experiment,
    /// Tuning-voltage span, V.
    pub v_lo: f64,
    pub v_hi: f64,
    /// Upsweep duration (chirp characterization), s.
    pub ramp_duration: f64,
    /// DAC samples in the upsweep (chirp characterization).
    pub dac_samples: usize,
    /// Chirps per sequence (chirp sequence).
    pub n_chirps: usize,
    /// Leading samples dropped per chirp (chirp sequence).
    pub skip: usize,
    pub decimation: u32,
    pub out_dir: PathBuf,
    /// Sent as `SIM:SEED` when set.
    pub seed: Option<u64>,
    /// Taken from `*IDN?` when unset.
    pub front_end: Option<FrontEndKind>,
    /// Defaults to the front end's natural wiring.
    pub routing: Option<Routing>,
    pub stft: StftConfig,
    pub peaks: PeakSearch,
}

impl ExperimentConfig {
    /// 0.7 → 1.0 V in 800 µs over 16384 DAC samples, acquired at 15.625 MS/s.
    pub fn chirp_characterization() -> Self {
        Self {
            host: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            timeout: DEFAULT_TIMEOUT,
            experiment: Experiment::ChirpChar,
            v_lo: 0.7,
            v_hi: 1.0,
            ramp_duration: 800e-6,
            dac_samples: BUFFER_SAMPLES,
            n_chirps: 1,
            skip: 0,
            decimation: 8,
            out_dir: PathBuf::from("out"),
            seed: None,
            front_end: None,
            routing: None,
            stft: StftConfig::default().with_fft_length(4096),
            peaks: PeakSearch::default(),
        }
    }

    /// 128 chirps of 128 samples at 122.07 kS/s, reshaped to 126 × 128.
    pub fn chirp_sequence() -> Self {
        Self {
            experiment: Experiment::ChirpSeq,
            n_chirps: 128,
            skip: 2,
            decimation: 1024,
            ..Self::chirp_characterization()
        }
    }

    pub fn for_experiment(experiment: Experiment) -> Self {
        match experiment {
            Experiment::ChirpChar => Self::chirp_characterization(),
            Experiment::ChirpSeq => Self::chirp_sequence(),
        }
    }

    pub fn sample_rate(&self) -> f64 {
        ADC_BASE_RATE / f64::from(self.decimation)
    }

    /// ADC (and DAC) samples per chirp of the sequence.
    pub fn samples_per_chirp(&self) -> usize {
        BUFFER_SAMPLES / self.n_chirps.max(1)
    }

    /// Chirp repetition interval of the sequence, s.
    pub fn chirp_duration(&self) -> f64 {
        self.samples_per_chirp() as f64 / self.sample_rate()
    }

    pub fn layout(&self) -> ChirpLayout {
        ChirpLayout { n_fast: self.samples_per_chirp() - self.skip, n_slow: self.n_chirps, skip: self.skip }
    }

    /// `SOUR1:FREQ:FIX` value: repetition rate of the whole uploaded waveform.
    pub fn generator_frequency(&self) -> f64 {
        match self.experiment {
            Experiment::ChirpChar => 1.0 / self.ramp_duration,
            Experiment::ChirpSeq => 1.0 / (self.chirp_duration() * self.n_chirps as f64),
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        let bad = |m: String| Err(ClientError::Config(m));
        if self.host.is_empty() {
            return bad("empty host".into());
        }
        if self.timeout.is_zero() {
            return bad("timeout must be positive".into());
        }
        if !(0.0 <= self.v_lo && self.v_lo < self.v_hi && self.v_hi <= 1.0) {
            return bad(format!("voltage span {}..{} V must satisfy 0 <= lo < hi <= 1", self.v_lo, self.v_hi));
        }
        Decimation::new(self.decimation).map_err(|e| ClientError::Config(e.to_string()))?;
        if !(self.peaks.threshold_db >= 0.0 && self.peaks.threshold_db.is_finite()) {
            return bad(format!("threshold {} dB must be >= 0", self.peaks.threshold_db));
        }
        if !self.peaks.min_snr_db.is_finite() {
            return bad(format!("noise-floor margin {} dB must be finite", self.peaks.min_snr_db));
        }
        match self.experiment {
            Experiment::ChirpChar => {
                if !(2..=BUFFER_SAMPLES).contains(&self.dac_samples) {
                    return bad(format!("{} DAC samples; need 2..={BUFFER_SAMPLES}", self.dac_samples));
                }
                if !(self.ramp_duration > 0.0 && self.ramp_duration.is_finite()) {
                    return bad(format!("ramp duration {} s must be positive", self.ramp_duration));
                }
                if self.dac_samples as f64 / self.ramp_duration > ADC_BASE_RATE {
                    return bad("ramp plays faster than the 125 MS/s DAC".into());
                }
                self.stft.validate().map_err(|e| ClientError::Config(e.to_string()))?;
                if self.stft.window_length > BUFFER_SAMPLES {
                    return bad("STFT window longer than the capture".into());
                }
                if matches!(self.routing, Some(r) if r != Routing::Prescaler) {
                    return bad("chirp characterization needs PRESCALER routing".into());
                }
            }
            Experiment::ChirpSeq => {
                if self.n_chirps < 2 || !BUFFER_SAMPLES.is_multiple_of(self.n_chirps) {
                    return bad(format!("{} chirps must be >= 2 and divide {BUFFER_SAMPLES}", self.n_chirps));
                }
                if self.skip + 2 > self.samples_per_chirp() {
                    return bad(format!("skip {} leaves fewer than 2 samples per chirp", self.skip));
                }
                if self.routing == Some(Routing::Prescaler) {
                    return bad("chirp sequence needs IQ or DUALREAL routing".into());
                }
            }
        }
        Ok(())
    }
}
