use num_complex::Complex;

use super::DspError;
use crate::Real;

const SPACING_TOLERANCE: f64 = 1e-9;

/// Bearing in degrees from the phase difference `arg(ch2) − arg(ch1)`
/// (wrapped to (−π, π]) between two receivers `spacing` metres apart:
/// `θ = asin(Δφ·λ / (2π·d))`. Positive angles mean the target is on the
/// side of channel 2's phase lead.
///
/// `|sin θ| ≥ 1` is rejected, including the ±90° boundary itself.
pub fn doa_phase_comparison<T: Real>(
    ch1: Complex<T>,
    ch2: Complex<T>,
    spacing: T,
    wavelength: T,
) -> Result<T, DspError> {
    if !(spacing > T::zero() && wavelength > T::zero()) {
        return Err(DspError::InvalidParams(format!("spacing {spacing}, wavelength {wavelength}")));
    }
    let ratio = spacing / wavelength;
    if ratio.as_f64() > 0.5 + SPACING_TOLERANCE {
        return Err(DspError::AmbiguousSpacing(ratio.as_f64()));
    }
    let dphi = (ch2 * ch1.conj()).arg();
    let s = dphi / (T::TAU() * ratio);
    if s.is_nan() || s.abs() >= T::one() {
        return Err(DspError::OutOfAngleRange(s.as_f64()));
    }
    Ok(s.asin().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn boresight() {
        let z = Complex::new(0.3, -0.2);
        assert_eq!(doa_phase_comparison(z, z * 2.0, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn half_wavelength_boundary_is_rejected() {
        let a = Complex::new(1.0, 0.0);
        let b = Complex::from_polar(1.0, PI);
        assert!(matches!(doa_phase_comparison(a, b, 0.5, 1.0), Err(DspError::OutOfAngleRange(_))));
    }

    #[test]
    fn wide_spacing_is_rejected() {
        let a = Complex::new(1.0, 0.0);
        assert!(matches!(doa_phase_comparison(a, a, 0.6, 1.0), Err(DspError::AmbiguousSpacing(_))));
    }

    #[test]
    fn known_angles_round_trip() {
        for deg in [-60.0f64, -40.0, -20.0, -5.0, 0.0, 20.0, 40.0, 70.0] {
            let psi = PI * deg.to_radians().sin();
            let a = Complex::from_polar(2.0, 0.7);
            let b = Complex::from_polar(1.5, 0.7 + psi);
            let got = doa_phase_comparison(a, b, 0.5, 1.0).unwrap();
            assert!((got - deg).abs() < 1e-9, "{deg} -> {got}");
        }
    }

    #[test]
    fn narrow_spacing_limits_range() {
        // d = λ/4: |Δφ| up to π/2 maps onto ±90°
        let a = Complex::new(1.0, 0.0);
        let b = Complex::from_polar(1.0, PI / 4.0);
        let got: f64 = doa_phase_comparison(a, b, 0.25, 1.0).unwrap();
        assert!((got - 30.0).abs() < 1e-9);
        let b = Complex::from_polar(1.0, 0.6 * PI);
        assert!(doa_phase_comparison(a, b, 0.25, 1.0).is_err());
    }
}
