#![allow(dead_code)]

use std::f64::consts::TAU;

use proptest::prelude::*;
use radar_kit::dsp::{peak_interp_column, stft, StftConfig};
use radar_kit::scpi::{Decimal, Mnemonic, ScpiCommand, ScpiValue};
use radar_kit::Complex;

pub fn direct_dft(x: &[Complex]) -> Vec<Complex> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, v)| v * Complex::from_polar(1.0, -TAU * ((k * j) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos()).collect()
}

/// Largest absolute deviation relative to the largest reference magnitude.
pub fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Worst-case error of the interpolated peak over a fine sweep of fractional
/// tone positions, in units of the window's own bin spacing `f_s / L`.
pub fn worst_fractional_error(fft_length: usize) -> f64 {
    let l = 256;
    let mut worst = 0.0f64;
    for i in 0..=200 {
        let k = 40.0 + i as f64 / 200.0;
        let x: Vec<f64> = (0..l).map(|n| (TAU * k * n as f64 / l as f64 + 0.3).cos()).collect();
        let cfg = StftConfig::default().with_fft_length(fft_length);
        let s = stft(&x, l as f64, &cfg).unwrap();
        let e = peak_interp_column(s.column(0), s.bin_frequencies()).unwrap();
        worst = worst.max((e.frequency - k).abs());
    }
    worst
}

pub fn mnemonic() -> impl Strategy<Value = Mnemonic> {
    ("[A-Za-z]([A-Za-z0-9]{0,6}[A-Za-z])?", proptest::option::of(0u32..100_000))
        .prop_map(|(name, suffix)| Mnemonic::new(&name, suffix).unwrap())
}

pub fn decimal() -> impl Strategy<Value = Decimal> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(|v| Decimal::from_f64(v).unwrap()),
        "[+-]?[0-9]{1,4}\\.[0-9]{0,4}([eE][+-]?[0-9]{1,3})?".prop_map(|s| Decimal::new(&s).unwrap()),
    ]
}

pub fn scpi_value() -> impl Strategy<Value = ScpiValue> {
    prop_oneof![
        any::<i64>().prop_map(ScpiValue::Integer),
        decimal().prop_map(ScpiValue::Decimal),
        "[A-Za-z_/][A-Za-z0-9_./-]{0,12}".prop_map(ScpiValue::Keyword),
        "[^\r\n]{0,16}".prop_map(ScpiValue::Text),
        proptest::collection::vec(decimal(), 0..8).prop_map(ScpiValue::Array),
    ]
}

/// Any command in canonical form.
pub fn scpi_command() -> impl Strategy<Value = ScpiCommand> {
    let path = prop_oneof![
        1 => "\\*[A-Z]{1,5}".prop_map(|n| vec![Mnemonic::new(&n, None).unwrap()]),
        4 => proptest::collection::vec(mnemonic(), 1..5),
    ];
    (path, any::<bool>(), proptest::collection::vec(scpi_value(), 0..4))
        .prop_filter_map("canonical", |(path, query, args)| ScpiCommand::new(path, query, args).ok())
}
