use super::{peak_interp_column, DspError, Spectrogram};
use crate::Real;

/// Ordinary least-squares line `f = intercept + slope·t` with per-point residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// `f_i − (intercept + slope·t_i)`, in input order.
    pub residuals: Vec<T>,
}

impl<T: Real> LinearFit<T> {
    pub fn predict(&self, t: T) -> T {
        self.intercept + self.slope * t
    }

    pub fn residual_rms(&self) -> T {
        if self.residuals.is_empty() {
            return T::zero();
        }
        let ss: T = self.residuals.iter().map(|r| *r * *r).sum();
        (ss / T::of_usize(self.residuals.len())).sqrt()
    }
}

/// Least-squares line through `(t, f)` points, computed about the means.
pub fn fit_linear_ramp<T: Real>(points: &[(T, T)]) -> Result<LinearFit<T>, DspError> {
    if points.len() < 2 {
        return Err(DspError::DegenerateAbscissa);
    }
    let n = T::of_usize(points.len());
    let t_mean = points.iter().map(|p| p.0).sum::<T>() / n;
    let f_mean = points.iter().map(|p| p.1).sum::<T>() / n;
    let mut stt = T::zero();
    let mut stf = T::zero();
    for &(t, f) in points {
        let dt = t - t_mean;
        stt = stt + dt * dt;
        stf = stf + dt * (f - f_mean);
    }
    if stt == T::zero() {
        return Err(DspError::DegenerateAbscissa);
    }
    let slope = stf / stt;
    let intercept = f_mean - slope * t_mean;
    let residuals = points.iter().map(|&(t, f)| f - (intercept + slope * t)).collect();
    Ok(LinearFit { slope, intercept, residuals })
}

/// Instantaneous-frequency measurement points and their linear fit.
#[derive(Debug, Clone, PartialEq)]
pub struct InstFreqTrack<T> {
    /// `(frame time, interpolated peak frequency)`.
    pub points: Vec<(T, T)>,
    pub fit: LinearFit<T>,
}

impl<T: Real> InstFreqTrack<T> {
    pub fn slope(&self) -> T {
        self.fit.slope
    }

    pub fn intercept(&self) -> T {
        self.fit.intercept
    }

    pub fn residuals(&self) -> &[T] {
        &self.fit.residuals
    }
}

/// Peak-interpolates every frame whose window lies within `[t_start, t_end]`
/// and fits a line to the resulting frequencies.
pub fn track_instantaneous_frequency<T: Real>(
    spec: &Spectrogram<T>,
    window_duration: T,
    t_start: T,
    t_end: T,
) -> Result<InstFreqTrack<T>, DspError> {
    let half = window_duration / T::of(2.0);
    let mut points = Vec::new();
    for (k, &t) in spec.frame_times().iter().enumerate() {
        if t - half < t_start || t + half > t_end {
            continue;
        }
        let peak = peak_interp_column(spec.column(k), spec.bin_frequencies())?;
        points.push((t, peak.frequency));
    }
    let fit = fit_linear_ramp(&points)?;
    Ok(InstFreqTrack { points, fit })
}
