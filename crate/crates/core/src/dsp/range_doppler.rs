use num_complex::Complex;
use rustfft::FftPlanner;

use super::{window_coefficients, DspError, Window};
use crate::{Real, SPEED_OF_LIGHT};

/// Chirp-sequence waveform parameters needed to label the map axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarParams<T> {
    /// RF sweep per chirp, Hz.
    pub bandwidth: T,
    /// Chirp repetition interval, s.
    pub chirp_duration: T,
    /// RF at mid-sweep, Hz.
    pub center_frequency: T,
    pub sample_rate: T,
}

impl<T: Real> RadarParams<T> {
    pub fn validate(&self) -> Result<(), DspError> {
        let ok = [self.bandwidth, self.chirp_duration, self.center_frequency, self.sample_rate]
            .iter()
            .all(|v| *v > T::zero() && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(DspError::InvalidParams(format!("{self:?}")))
        }
    }

    pub fn wavelength(&self) -> T {
        T::of(SPEED_OF_LIGHT) / self.center_frequency
    }

    /// Chirp slope, Hz/s.
    pub fn slope(&self) -> T {
        self.bandwidth / self.chirp_duration
    }

    /// Half-width of the unambiguous velocity span, m/s: λ / (4·T_c).
    pub fn max_unambiguous_velocity(&self) -> T {
        self.wavelength() / (T::of(4.0) * self.chirp_duration)
    }
}

/// How a capture's samples are cut into a fast-time/slow-time matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChirpLayout {
    /// Samples kept per chirp.
    pub n_fast: usize,
    /// Number of chirps.
    pub n_slow: usize,
    /// Leading samples dropped at the start of every chirp.
    pub skip: usize,
}

impl ChirpLayout {
    pub fn samples_per_chirp(&self) -> usize {
        self.n_fast + self.skip
    }

    pub fn required_samples(&self) -> usize {
        self.n_slow * self.samples_per_chirp()
    }
}

/// Complex range-Doppler spectrum. Rows are range bins in FFT order (bin 0
/// is zero range, upper half negative beat frequencies); columns are Doppler
/// bins shifted so zero velocity sits at index `n_doppler / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap<T> {
    values: Vec<Complex<T>>,
    n_range: usize,
    n_doppler: usize,
    range_axis: Vec<T>,
    velocity_axis: Vec<T>,
    range_per_bin: T,
    velocity_per_bin: T,
    params: RadarParams<T>,
}

impl<T: Real> RangeDopplerMap<T> {
    pub fn n_range_bins(&self) -> usize {
        self.n_range
    }

    pub fn n_doppler_bins(&self) -> usize {
        self.n_doppler
    }

    pub fn value(&self, range_bin: usize, doppler_bin: usize) -> Complex<T> {
        self.values[range_bin * self.n_doppler + doppler_bin]
    }

    pub fn magnitude(&self, range_bin: usize, doppler_bin: usize) -> T {
        self.value(range_bin, doppler_bin).norm()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Signed range of each row, m.
    pub fn range_axis(&self) -> &[T] {
        &self.range_axis
    }

    /// Radial velocity of each column, m/s (negative = approaching).
    pub fn velocity_axis(&self) -> &[T] {
        &self.velocity_axis
    }

    pub fn range_per_bin(&self) -> T {
        self.range_per_bin
    }

    pub fn velocity_per_bin(&self) -> T {
        self.velocity_per_bin
    }

    pub fn params(&self) -> &RadarParams<T> {
        &self.params
    }

    pub fn max_magnitude(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// `20·log10(|X| / max |X|)`; −∞ for zero cells.
    pub fn magnitude_db(&self, range_bin: usize, doppler_bin: usize) -> T {
        self.magnitude_db_with(range_bin, doppler_bin, self.max_magnitude())
    }

    pub(crate) fn magnitude_db_with(&self, range_bin: usize, doppler_bin: usize, max: T) -> T {
        T::of(20.0) * (self.magnitude(range_bin, doppler_bin) / max).log10()
    }

    /// Doppler column holding zero velocity.
    pub fn zero_doppler_bin(&self) -> usize {
        self.n_doppler / 2
    }
}

/// Signed DFT frequency index of bin `k` out of `n`.
fn signed_index(k: usize, n: usize) -> isize {
    if k < n.div_ceil(2) {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Fast-time/slow-time reshape, Hann taper on both axes, 2D DFT, Doppler
/// shift. Chirp `m` starts at sample `m·(n_fast + skip)`; its first `skip`
/// samples are dropped.
///
/// Axes: `Δr = c·T_c·(f_s/n_fast)/(2W)` and `Δv = λ/(2·n_slow·T_c)`.
pub fn range_doppler<T: Real>(
    samples: &[Complex<T>],
    layout: ChirpLayout,
    params: RadarParams<T>,
) -> Result<RangeDopplerMap<T>, DspError> {
    params.validate()?;
    let ChirpLayout { n_fast, n_slow, skip } = layout;
    if n_fast == 0 || n_slow == 0 {
        return Err(DspError::InvalidParams("empty chirp layout".into()));
    }
    if samples.len() < layout.required_samples() {
        return Err(DspError::TooShort { got: samples.len(), need: layout.required_samples() });
    }

    let w_fast: Vec<T> = window_coefficients(Window::Hann, n_fast);
    let w_slow: Vec<T> = window_coefficients(Window::Hann, n_slow);
    let mut planner = FftPlanner::<T>::new();
    let fft_fast = planner.plan_fft_forward(n_fast);
    let fft_slow = planner.plan_fft_forward(n_slow);

    // chirp-major scratch: rows = chirps, columns = fast time
    let mut by_chirp = vec![Complex::new(T::zero(), T::zero()); n_slow * n_fast];
    for m in 0..n_slow {
        let start = m * layout.samples_per_chirp() + skip;
        let row = &mut by_chirp[m * n_fast..(m + 1) * n_fast];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = samples[start + j] * w_fast[j] * w_slow[m];
        }
        fft_fast.process(row);
    }

    let half = n_slow / 2;
    let mut values = vec![Complex::new(T::zero(), T::zero()); n_fast * n_slow];
    let mut column = vec![Complex::new(T::zero(), T::zero()); n_slow];
    for r in 0..n_fast {
        for (m, slot) in column.iter_mut().enumerate() {
            *slot = by_chirp[m * n_fast + r];
        }
        fft_slow.process(&mut column);
        for (k, z) in column.iter().enumerate() {
            values[r * n_slow + (k + half) % n_slow] = *z;
        }
    }

    let c = T::of(SPEED_OF_LIGHT);
    let range_per_bin =
        c * params.chirp_duration * (params.sample_rate / T::of_usize(n_fast)) / (T::of(2.0) * params.bandwidth);
    let velocity_per_bin = params.wavelength() / (T::of(2.0) * T::of_usize(n_slow) * params.chirp_duration);
    let range_axis = (0..n_fast).map(|k| T::of(signed_index(k, n_fast) as f64) * range_per_bin).collect();
    let velocity_axis = (0..n_slow).map(|l| (T::of_usize(l) - T::of_usize(half)) * velocity_per_bin).collect();
    Ok(RangeDopplerMap {
        values,
        n_range: n_fast,
        n_doppler: n_slow,
        range_axis,
        velocity_axis,
        range_per_bin,
        velocity_per_bin,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RadarParams<f64> {
        RadarParams {
            bandwidth: 216e6,
            chirp_duration: 128.0 / 122070.3125,
            center_frequency: 24.108e9,
            sample_rate: 122070.3125,
        }
    }

    #[test]
    fn chirp_sequence_layout_shape_and_axes() {
        let layout = ChirpLayout { n_fast: 126, n_slow: 128, skip: 2 };
        assert_eq!(layout.required_samples(), 16384);
        let x = vec![Complex::new(0.0, 0.0); 16384];
        let map = range_doppler(&x, layout, params()).unwrap();
        assert_eq!((map.n_range_bins(), map.n_doppler_bins()), (126, 128));
        assert_eq!(map.range_axis().len(), 126);
        assert_eq!(map.velocity_axis().len(), 128);
        assert!((map.range_per_bin() - 0.7051).abs() < 1e-3, "{}", map.range_per_bin());
        assert!((map.velocity_per_bin() - 0.04633).abs() < 1e-4, "{}", map.velocity_per_bin());
        assert!((params().max_unambiguous_velocity() - 2.965).abs() < 1e-3);
        assert_eq!(map.velocity_axis()[map.zero_doppler_bin()], 0.0);
        assert!(map.range_axis()[63] < 0.0 && map.range_axis()[62] > 0.0);
        // all-zero capture gives an all-zero map
        assert!(map.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn too_short_and_bad_params() {
        let layout = ChirpLayout { n_fast: 126, n_slow: 128, skip: 2 };
        let x = vec![Complex::new(0.0, 0.0); 16383];
        assert!(matches!(range_doppler(&x, layout, params()), Err(DspError::TooShort { .. })));
        let mut p = params();
        p.bandwidth = 0.0;
        assert!(range_doppler(&[Complex::new(0.0, 0.0); 16384], layout, p).is_err());
    }

    #[test]
    fn signed_bins() {
        assert_eq!(signed_index(0, 126), 0);
        assert_eq!(signed_index(62, 126), 62);
        assert_eq!(signed_index(63, 126), -63);
        assert_eq!(signed_index(2, 5), 2);
        assert_eq!(signed_index(3, 5), -2);
    }
}
