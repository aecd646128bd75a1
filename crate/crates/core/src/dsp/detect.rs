use num_complex::Complex;

use super::RangeDopplerMap;
use crate::Real;

/// Peak-picking options for [`detect_peaks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSearch {
    /// Cells more than this many dB below the map maximum are ignored.
    pub threshold_db: f64,
    /// Cells must also exceed the median cell magnitude (a noise-floor
    /// estimate) by this many dB.
    pub min_snr_db: f64,
    pub max_peaks: usize,
    /// Never report range bin 0 (DC coupling leakage).
    pub mask_zero_range: bool,
    /// Only report bins with positive range.
    pub positive_range_only: bool,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self { threshold_db: 20.0, min_snr_db: 20.0, max_peaks: 8, mask_zero_range: true, positive_range_only: true }
    }
}

impl PeakSearch {
    pub fn with_threshold_db(mut self, db: f64) -> Self {
        self.threshold_db = db;
        self
    }

    pub fn with_min_snr_db(mut self, db: f64) -> Self {
        self.min_snr_db = db;
        self
    }

    pub fn with_max_peaks(mut self, n: usize) -> Self {
        self.max_peaks = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection<T> {
    pub range_m: T,
    pub velocity_mps: T,
    /// Relative to the map maximum.
    pub magnitude_db: T,
    pub range_bin: usize,
    pub doppler_bin: usize,
    /// Complex map value at the peak.
    pub value: Complex<T>,
}

/// Local maxima over the 8-neighbourhood (both axes wrap, as the spectrum is
/// periodic) that clear both the relative and the noise-floor threshold.
/// Plateaus are reported once, at their lowest (range, Doppler) cell.
/// Results are sorted by magnitude, then range bin, then Doppler bin.
pub fn detect_peaks<T: Real>(map: &RangeDopplerMap<T>, search: &PeakSearch) -> Vec<Detection<T>> {
    let (nr, nd) = (map.n_range_bins(), map.n_doppler_bins());
    let max = map.max_magnitude();
    if nr == 0 || nd == 0 || max <= T::zero() || search.max_peaks == 0 {
        return Vec::new();
    }
    let relative = max * T::of(10f64.powf(-search.threshold_db / 20.0));
    let noise = median_magnitude(map) * T::of(10f64.powf(search.min_snr_db / 20.0));
    let floor = relative.max(noise);
    let mut found = Vec::new();
    for r in 0..nr {
        if search.mask_zero_range && r == 0 {
            continue;
        }
        if search.positive_range_only && map.range_axis()[r] <= T::zero() {
            continue;
        }
        for d in 0..nd {
            let m = map.magnitude(r, d);
            if m <= T::zero() || m < floor || !is_local_max(map, r, d, m) {
                continue;
            }
            found.push((m, r, d));
        }
    }
    found.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    found.truncate(search.max_peaks);
    found
        .into_iter()
        .map(|(_, r, d)| Detection {
            range_m: map.range_axis()[r],
            velocity_mps: map.velocity_axis()[d],
            magnitude_db: map.magnitude_db_with(r, d, max),
            range_bin: r,
            doppler_bin: d,
            value: map.value(r, d),
        })
        .collect()
}

fn median_magnitude<T: Real>(map: &RangeDopplerMap<T>) -> T {
    let mut m: Vec<T> = map.values().iter().map(|z| z.norm()).collect();
    let mid = m.len() / 2;
    let (_, v, _) = m.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    *v
}

fn is_local_max<T: Real>(map: &RangeDopplerMap<T>, r: usize, d: usize, m: T) -> bool {
    let (nr, nd) = (map.n_range_bins(), map.n_doppler_bins());
    for dr in [nr - 1, 0, 1] {
        for dd in [nd - 1, 0, 1] {
            let (rr, rd) = ((r + dr) % nr, (d + dd) % nd);
            if (rr, rd) == (r, d) {
                continue;
            }
            let other = map.magnitude(rr, rd);
            if other > m || (other == m && (rr, rd) < (r, d)) {
                return false;
            }
        }
    }
    true
}
