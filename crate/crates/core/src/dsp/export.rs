//! CSV writers for plot-ready output. Magnitudes are written as dB relative
//! to the maximum of the exported object, floored at [`MAG_DB_FLOOR`].

use std::io::Write;

use super::{Detection, InstFreqTrack, RangeDopplerMap, Spectrogram};
use crate::Real;

pub const MAG_DB_FLOOR: f64 = -300.0;

pub type Result<T> = std::result::Result<T, csv::Error>;

fn db<T: Real>(m: T, max: T) -> f64 {
    if max <= T::zero() {
        return MAG_DB_FLOOR;
    }
    (20.0 * (m / max).as_f64().log10()).max(MAG_DB_FLOOR)
}

/// Long form `t,f,mag_db`, frame-major. `band` restricts the frequency rows
/// to `[lo, hi]` Hz.
pub fn write_spectrogram<T: Real, W: Write>(out: W, spec: &Spectrogram<T>, band: Option<(T, T)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f", "mag_db"])?;
    let max = spec.max_magnitude();
    for (k, t) in spec.frame_times().iter().enumerate() {
        for (b, f) in spec.bin_frequencies().iter().enumerate() {
            if let Some((lo, hi)) = band {
                if *f < lo || *f > hi {
                    continue;
                }
            }
            w.serialize((t.as_f64(), f.as_f64(), db(spec.magnitude(b, k), max)))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,f_meas,f_fit,residual`, one row per track point.
pub fn write_track<T: Real, W: Write>(out: W, track: &InstFreqTrack<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f_meas", "f_fit", "residual"])?;
    for (&(t, f), r) in track.points.iter().zip(track.residuals()) {
        w.serialize((t.as_f64(), f.as_f64(), track.fit.predict(t).as_f64(), r.as_f64()))?;
    }
    w.flush()?;
    Ok(())
}

/// `range_m,velocity_mps,mag_db`, range-major in map order.
pub fn write_range_doppler<T: Real, W: Write>(out: W, map: &RangeDopplerMap<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["range_m", "velocity_mps", "mag_db"])?;
    let max = map.max_magnitude();
    for (r, range) in map.range_axis().iter().enumerate() {
        for (d, vel) in map.velocity_axis().iter().enumerate() {
            w.serialize((range.as_f64(), vel.as_f64(), db(map.magnitude(r, d), max)))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `range_m,velocity_mps,mag_db`, in detection order.
pub fn write_detections<T: Real, W: Write>(out: W, detections: &[Detection<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["range_m", "velocity_mps", "mag_db"])?;
    for d in detections {
        w.serialize((d.range_m.as_f64(), d.velocity_mps.as_f64(), d.magnitude_db.as_f64().max(MAG_DB_FLOOR)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{fit_linear_ramp, stft, StftConfig, Window};

    fn text(buf: Vec<u8>) -> String {
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn track_columns() {
        let points = vec![(0.0, 1.0), (1.0, 3.5), (2.0, 5.0)];
        let fit = fit_linear_ramp(&points).unwrap();
        let track = InstFreqTrack { points, fit };
        let mut buf = Vec::new();
        write_track(&mut buf, &track).unwrap();
        let s = text(buf);
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "t,f_meas,f_fit,residual");
        assert_eq!(lines.len(), 4);
        let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
        assert!((row[1] - row[2] - row[3]).abs() < 1e-12);
    }

    #[test]
    fn spectrogram_long_form_and_band() {
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.9).sin()).collect();
        let cfg = StftConfig { window_length: 16, hop: 16, window: Window::Hann, fft_length: 16 };
        let spec = stft(&x, 16.0, &cfg).unwrap();
        let mut buf = Vec::new();
        write_spectrogram(&mut buf, &spec, None).unwrap();
        let s = text(buf);
        assert!(s.starts_with("t,f,mag_db\n"));
        assert_eq!(s.lines().count(), 1 + 4 * 9);
        assert!(s.lines().skip(1).all(|l| l.split(',').count() == 3));
        let mut buf = Vec::new();
        write_spectrogram(&mut buf, &spec, Some((2.0, 4.0))).unwrap();
        assert_eq!(text(buf).lines().count(), 1 + 4 * 3);
    }

    #[test]
    fn zero_magnitudes_hit_the_floor() {
        assert_eq!(db(0.0f64, 1.0), MAG_DB_FLOOR);
        assert_eq!(db(1.0f64, 0.0), MAG_DB_FLOOR);
        assert_eq!(db(1.0f64, 1.0), 0.0);
    }
}
