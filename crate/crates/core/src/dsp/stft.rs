use num_complex::Complex;
use rustfft::FftPlanner;

use super::{window_coefficients, DspError};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rect,
}

/// Short-time Fourier transform layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    pub window: Window,
    /// Transform size; frames are zero-padded from `window_length`.
    pub fft_length: usize,
}

impl Default for StftConfig {
    /// 256-sample Hann frames with 75 % overlap, no zero padding.
    fn default() -> Self {
        Self { window_length: 256, hop: 64, window: Window::Hann, fft_length: 256 }
    }
}

impl StftConfig {
    pub fn with_fft_length(mut self, n: usize) -> Self {
        self.fft_length = n;
        self
    }

    pub fn validate(&self) -> Result<(), DspError> {
        if !(0 < self.hop && self.hop <= self.window_length && self.window_length <= self.fft_length) {
            return Err(DspError::InvalidConfig(format!(
                "need 0 < hop ({}) <= window ({}) <= fft ({})",
                self.hop, self.window_length, self.fft_length
            )));
        }
        Ok(())
    }

    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.window_length {
            0
        } else {
            (n_samples - self.window_length) / self.hop + 1
        }
    }
}

/// One-sided STFT magnitudes of a real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    /// `frames[k][bin]`: magnitude of bin `bin` in frame `k`.
    frames: Vec<Vec<T>>,
    frame_times: Vec<T>,
    bin_frequencies: Vec<T>,
    bin_spacing: T,
}

impl<T: Real> Spectrogram<T> {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_freq_bins(&self) -> usize {
        self.bin_frequencies.len()
    }

    pub fn magnitude(&self, bin: usize, frame: usize) -> T {
        self.frames[frame][bin]
    }

    /// All bins of one frame.
    pub fn column(&self, frame: usize) -> &[T] {
        &self.frames[frame]
    }

    /// Center time of each frame, s.
    pub fn frame_times(&self) -> &[T] {
        &self.frame_times
    }

    pub fn bin_frequencies(&self) -> &[T] {
        &self.bin_frequencies
    }

    pub fn bin_spacing(&self) -> T {
        self.bin_spacing
    }

    pub fn max_magnitude(&self) -> T {
        self.frames.iter().flatten().copied().fold(T::zero(), T::max)
    }
}

/// Frame `k` covers samples `[k·hop, k·hop + L)` and is stamped at
/// `(k·hop + L/2) / f_s`.
pub fn stft<T: Real>(samples: &[T], sample_rate: T, cfg: &StftConfig) -> Result<Spectrogram<T>, DspError> {
    cfg.validate()?;
    if samples.len() < cfg.window_length {
        return Err(DspError::TooShort { got: samples.len(), need: cfg.window_length });
    }
    let n_frames = cfg.n_frames(samples.len());
    let n_bins = cfg.fft_length / 2 + 1;
    let win: Vec<T> = window_coefficients(cfg.window, cfg.window_length);
    let fft = FftPlanner::<T>::new().plan_fft_forward(cfg.fft_length);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); cfg.fft_length];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];

    let mut frames = Vec::with_capacity(n_frames);
    let mut frame_times = Vec::with_capacity(n_frames);
    for k in 0..n_frames {
        let start = k * cfg.hop;
        for (slot, (x, w)) in buf.iter_mut().zip(samples[start..start + cfg.window_length].iter().zip(&win)) {
            *slot = Complex::new(*x * *w, T::zero());
        }
        for slot in buf[cfg.window_length..].iter_mut() {
            *slot = Complex::new(T::zero(), T::zero());
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        frames.push(buf[..n_bins].iter().map(|z| z.norm()).collect());
        frame_times.push(T::of_usize(2 * start + cfg.window_length) / (T::of(2.0) * sample_rate));
    }
    let bin_spacing = sample_rate / T::of_usize(cfg.fft_length);
    let bin_frequencies = (0..n_bins).map(|b| T::of_usize(b) * bin_spacing).collect();
    Ok(Spectrogram { frames, frame_times, bin_frequencies, bin_spacing })
}
