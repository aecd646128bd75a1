use std::f64::consts::TAU;

use super::*;
use crate::{BUFFER_SAMPLES, SPEED_OF_LIGHT};

fn exp_a_ramp() -> TuningRamp {
    TuningRamp::linear_upsweep(0.7, 1.0, 800e-6, BUFFER_SAMPLES).unwrap()
}

fn exp_b_drive() -> (Drive, Decimation) {
    let dec = Decimation::new(1024).unwrap();
    let ramp = TuningRamp::chirp_sequence(0.7, 1.0, 128, 128, dec.sample_rate()).unwrap();
    (Drive::single(ramp).unwrap(), dec)
}

/// Rising zero crossings of `x` (linear interpolation), in seconds.
fn rising_crossings(x: &[f64], fs: f64) -> Vec<f64> {
    x.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < 0.0 && w[1] >= 0.0)
        .map(|(i, w)| (i as f64 + w[0] / (w[0] - w[1])) / fs)
        .collect()
}

#[test]
fn rf_frequency_examples() {
    let fe = FrontEndModel::ivs947();
    let ramp = exp_a_ramp();
    assert_eq!(instantaneous_rf_frequency(&ramp, &fe, 0.0).unwrap(), 24.0e9);
    assert!((fe.rf_frequency(1.0) - (24.0e9 + 216e6)).abs() < 1e-3);
    let mid = instantaneous_rf_frequency(&ramp, &fe, 400e-6).unwrap();
    assert!((mid - 24.108e9).abs() < 1e-3, "{mid}");
    assert!(instantaneous_rf_frequency(&ramp, &fe, 800e-6).is_err());
    assert!((ramp.bandwidth(&fe) - 216e6).abs() < 1e-3);
}

#[test]
fn prescaler_constant_tone() {
    let fe = FrontEndModel::ivs947();
    // flat 0.7 V: RF = 24 GHz exactly
    let ramp = TuningRamp::new(vec![0.7; 16], 1e6, RampMode::SingleUpsweep, 1, 0.7, 0.7).unwrap();
    let fs = 125e6;
    let x = prescaler_output(&Drive::single(ramp).unwrap(), &fe, fs, BUFFER_SAMPLES).unwrap();
    let z = rising_crossings(&x, fs);
    let f = (z.len() - 1) as f64 / (z[z.len() - 1] - z[0]);
    let expect = 24.0e9 / 8192.0;
    assert_eq!(expect, 2_929_687.5);
    assert!((f - expect).abs() / expect < 1e-6, "{f}");
    assert!(x.iter().all(|v| v.abs() <= PRESCALER_AMPLITUDE));
}

#[test]
fn prescaler_sweep_spans_divided_bandwidth() {
    let fe = FrontEndModel::ivs947();
    let fs = 15.625e6;
    let drive = Drive::single(exp_a_ramp()).unwrap();
    let x = prescaler_output(&drive, &fe, fs, BUFFER_SAMPLES).unwrap();
    // crossing k sits at phase k cycles: fit k = a + b·t + c·t² over the ramp
    let z: Vec<f64> = rising_crossings(&x, fs).into_iter().filter(|t| *t < 800e-6).collect();
    let tm = z.iter().sum::<f64>() / z.len() as f64;
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (k, t) in z.iter().enumerate() {
        let u = (t - tm) * 1e4;
        let basis = [1.0, u, u * u];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
            r[i] += basis[i] * k as f64;
        }
    }
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let mut mc = m;
    for i in 0..3 {
        mc[i][2] = r[i];
    }
    let c = det3(mc) / det3(m) * 1e8;
    let span = 2.0 * c * 800e-6;
    let expect: f64 = 216e6 / 8192.0;
    assert!((expect - 26367.1875).abs() < 1e-9);
    assert!((span - expect).abs() / expect < 0.01, "{span} vs {expect}");
}

#[test]
fn prescaler_empty_and_oversized() {
    let fe = FrontEndModel::ivs947();
    let drive = Drive::single(exp_a_ramp()).unwrap();
    assert!(prescaler_output(&drive, &fe, 1e6, 0).unwrap().is_empty());
    assert!(matches!(prescaler_output(&drive, &fe, 1e6, BUFFER_SAMPLES + 1), Err(SimError::BufferOverflow { .. })));
    assert!(matches!(
        prescaler_output(&drive, &FrontEndModel::ivs565(), 1e6, 8),
        Err(SimError::NoPrescaler(FrontEndKind::Ivs565))
    ));
}

#[test]
fn prescaler_above_passband_is_suppressed() {
    let fe = FrontEndModel::ivs947();
    let drive = Drive::single(exp_a_ramp()).unwrap();
    let cap = acquire_prescaler(&drive, &fe, 0.0, Decimation::new(64).unwrap(), 256, 0).unwrap();
    assert!(cap.channel(0).unwrap().iter().all(|v| *v == 0.0));
    let cap = acquire_prescaler(&drive, &fe, 0.0, Decimation::new(8).unwrap(), 256, 0).unwrap();
    assert!(cap.channel(0).unwrap().iter().any(|v| *v != 0.0));
}

#[test]
fn empty_scene_is_silent() {
    let (drive, dec) = exp_b_drive();
    let cap = simulate_rx(&drive, &FrontEndModel::ivs947(), &Scene::empty(), dec, BUFFER_SAMPLES, 1).unwrap();
    assert_eq!(cap.channels().len(), 2);
    assert!(cap.channels().iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn static_target_beat_frequency() {
    let (drive, dec) = exp_b_drive();
    let fe = FrontEndModel::ivs947();
    let r = 7.277;
    let scene = Scene::new(vec![PointTarget::new(r, 0.0, 0.5)], 0.0).unwrap();
    let cap = simulate_rx(&drive, &fe, &scene, dec, BUFFER_SAMPLES, 1).unwrap();
    let iq = cap.iq().unwrap();
    let t_c = 128.0 / dec.sample_rate();
    let f_b = 2.0 * 216e6 * r / (SPEED_OF_LIGHT * t_c);
    assert!((f_b - 10_000.0).abs() < 1.0, "{f_b}");
    // direct DFT of chirp 3
    let chirp = &iq[3 * 128..4 * 128];
    let power: Vec<f64> = (0..128)
        .map(|k| {
            let mut acc = num_complex::Complex::new(0.0, 0.0);
            for (n, z) in chirp.iter().enumerate() {
                acc += z * num_complex::Complex::from_polar(1.0, -TAU * (k * n) as f64 / 128.0);
            }
            acc.norm()
        })
        .collect();
    let peak = (0..128).max_by(|&a, &b| power[a].total_cmp(&power[b])).unwrap();
    let bin = dec.sample_rate() / 128.0;
    assert!((peak as f64 - f_b / bin).abs() <= 1.0, "peak {peak}, expected {}", f_b / bin);
}

#[test]
fn doppler_phase_step_per_chirp() {
    let (drive, dec) = exp_b_drive();
    let fe = FrontEndModel::ivs947();
    let v = -2.0;
    let scene = Scene::new(vec![PointTarget::new(15.0, v, 0.9)], 0.0).unwrap();
    let iq = simulate_rx(&drive, &fe, &scene, dec, BUFFER_SAMPLES, 1).unwrap().iq().unwrap();
    let f_c = 24.108e9;
    let f_d = 2.0 * v * f_c / SPEED_OF_LIGHT;
    assert!((f_d + 321.6).abs() < 0.5, "{f_d}");
    let t_c = 128.0 / dec.sample_rate();
    let step = f_d * t_c;
    assert!((step + 0.337).abs() < 0.001, "{step}");
    let expect = (TAU * step + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    for m in [0usize, 17, 90] {
        let a = iq[m * 128 + 40];
        let b = iq[(m + 1) * 128 + 40];
        let got = (b * a.conj()).arg();
        assert!((got - expect).abs() < 1e-3, "chirp {m}: {got} vs {expect}");
    }
}

#[test]
fn iq_magnitude_constant_within_chirp() {
    let (drive, dec) = exp_b_drive();
    let a = 0.6;
    let scene = Scene::new(vec![PointTarget::new(9.0, 0.0, a)], 0.0).unwrap();
    let iq = simulate_rx(&drive, &FrontEndModel::ivs947(), &scene, dec, BUFFER_SAMPLES, 1).unwrap().iq().unwrap();
    let bound = std::f64::consts::SQRT_2 * ADC_LSB / 2.0;
    // the first sample after each flyback is outside the passband
    for (j, z) in iq.iter().enumerate().filter(|(j, _)| *j == 0 || j % 128 != 0) {
        assert!((z.norm() - a).abs() <= bound + 1e-15, "{} at {j}", z.norm());
    }
}

#[test]
fn superposition_before_quantization() {
    let (drive, dec) = exp_b_drive();
    let fe = FrontEndModel::ivs947();
    let t1 = PointTarget::new(4.0, 1.2, 0.3);
    let t2 = PointTarget::new(21.0, -0.7, 0.2);
    let run = |targets: Vec<PointTarget>| {
        simulate_rx_analog(&drive, &fe, &Scene::new(targets, 0.0).unwrap(), dec, BUFFER_SAMPLES, 9).unwrap()
    };
    let both = run(vec![t1, t2]);
    let a = run(vec![t1]);
    let b = run(vec![t2]);
    for c in 0..2 {
        for j in 0..BUFFER_SAMPLES {
            assert!((both[c][j] - a[c][j] - b[c][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn seeded_noise_is_deterministic() {
    let (drive, dec) = exp_b_drive();
    let fe = FrontEndModel::ivs947();
    let scene = Scene::new(vec![PointTarget::new(10.0, 0.5, 0.2)], 0.01).unwrap();
    let a = simulate_rx(&drive, &fe, &scene, dec, BUFFER_SAMPLES, 42).unwrap();
    let b = simulate_rx(&drive, &fe, &scene, dec, BUFFER_SAMPLES, 42).unwrap();
    let c = simulate_rx(&drive, &fe, &scene, dec, BUFFER_SAMPLES, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn dual_real_channel_phase() {
    let (drive, dec) = exp_b_drive();
    let fe = FrontEndModel::ivs565();
    let f_c = drive.ramp().center_frequency(&fe);
    assert!((fe.rx_spacing.unwrap() - SPEED_OF_LIGHT / f_c / 2.0).abs() < 1e-6);
    let boresight = Scene::new(vec![PointTarget::new(12.0, 0.3, 0.4)], 0.0).unwrap();
    let ch = simulate_rx_analog(&drive, &fe, &boresight, dec, BUFFER_SAMPLES, 0).unwrap();
    assert_eq!(ch[0], ch[1]);

    // bearing: compare against the closed-form channel phase
    let theta: f64 = 20.0;
    let off = Scene::new(vec![PointTarget::new(12.0, 0.0, 0.4).with_bearing(theta)], 0.0).unwrap();
    let ch = simulate_rx_analog(&drive, &fe, &off, dec, 128, 0).unwrap();
    let psi = TAU * fe.rx_spacing.unwrap() * f_c / SPEED_OF_LIGHT * theta.to_radians().sin();
    // project each channel onto the analytic beat tone of the first chirp
    let proj = |x: &[f64]| {
        let mut acc = num_complex::Complex::new(0.0, 0.0);
        let f = 2.0 * 12.0 / SPEED_OF_LIGHT * 216e6 / (128.0 / dec.sample_rate());
        for (n, v) in x.iter().enumerate() {
            acc += v * num_complex::Complex::from_polar(1.0, -TAU * f * n as f64 / dec.sample_rate());
        }
        acc
    };
    let d = (proj(&ch[1]) * proj(&ch[0]).conj()).arg();
    assert!((d - psi).abs() < 0.05, "{d} vs {psi}");
}

#[test]
fn beat_outside_passband_is_removed() {
    let (drive, dec) = exp_b_drive();
    let scene = Scene::new(vec![PointTarget::new(100.0, 0.0, 0.5)], 0.0).unwrap();
    let cap = simulate_rx(&drive, &FrontEndModel::ivs947(), &scene, dec, 512, 0).unwrap();
    assert!(cap.channels().iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn coupling_appears_at_dc() {
    let (drive, dec) = exp_b_drive();
    let mut scene = Scene::empty();
    scene.coupling_amplitude = 0.25;
    let cap = simulate_rx(&drive, &FrontEndModel::ivs947(), &scene, dec, 64, 0).unwrap();
    assert!(cap.channel(0).unwrap().iter().all(|v| *v == 0.25));
    assert!(cap.channel(1).unwrap().iter().all(|v| *v == 0.0));
}
