use super::DspError;
use crate::Real;

/// Result of a three-point peak refinement on one spectrum column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate<T> {
    pub frequency: T,
    /// Index of the largest magnitude (lowest index on ties).
    pub bin: usize,
    /// Fractional offset from `bin`, in bins; zero at the edges.
    pub offset: T,
    /// Set when every magnitude in the column is equal.
    pub flat: bool,
}

/// Vertex of the parabola through `(−1, α)`, `(0, β)`, `(1, γ)`, clamped to ±½.
/// A degenerate (straight-line) stencil gives zero.
pub fn parabolic_offset<T: Real>(alpha: T, beta: T, gamma: T) -> T {
    let denom = alpha - T::of(2.0) * beta + gamma;
    if denom == T::zero() {
        return T::zero();
    }
    let half = T::of(0.5);
    (half * (alpha - gamma) / denom).max(-half).min(half)
}

/// Peak frequency of one spectrum column: arg-max followed by quadratic
/// interpolation through the peak and its two neighbours. Edge maxima are
/// returned without interpolation.
pub fn peak_interp_column<T: Real>(column: &[T], bin_frequencies: &[T]) -> Result<PeakEstimate<T>, DspError> {
    if column.len() < 3 || bin_frequencies.len() != column.len() {
        return Err(DspError::TooShort { got: column.len().min(bin_frequencies.len()), need: 3 });
    }
    let mut p = 0;
    for (i, v) in column.iter().enumerate() {
        if *v > column[p] {
            p = i;
        }
    }
    let flat = column.iter().all(|v| *v == column[0]);
    let spacing = bin_frequencies[1] - bin_frequencies[0];
    let offset = if p == 0 || p + 1 == column.len() || flat {
        T::zero()
    } else {
        parabolic_offset(column[p - 1], column[p], column[p + 1])
    };
    Ok(PeakEstimate { frequency: bin_frequencies[p] + offset * spacing, bin: p, offset, flat })
}
