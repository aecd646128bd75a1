use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Capture, Decimation, Drive, FrontEndModel, Scene, SimError, TuningRamp};
use crate::{BUFFER_SAMPLES, SPEED_OF_LIGHT};

/// Peak voltage of the prescaler output as seen by the ADC.
pub const PRESCALER_AMPLITUDE: f64 = 0.5;

/// RF output at time `t` within one period of `ramp`.
pub fn instantaneous_rf_frequency(ramp: &TuningRamp, fe: &FrontEndModel, t: f64) -> Result<f64, SimError> {
    Ok(fe.rf_frequency(ramp.voltage_at(t)?))
}

fn check_len(n: usize) -> Result<(), SimError> {
    if n > BUFFER_SAMPLES {
        Err(SimError::BufferOverflow { requested: n })
    } else {
        Ok(())
    }
}

fn sample_time(j: usize, sample_rate: f64) -> f64 {
    j as f64 / sample_rate
}

/// Divided VCO signal: a sine whose phase is the RF phase divided by the
/// prescaler ratio. Unfiltered, noiseless, unquantized.
pub fn prescaler_output(drive: &Drive, fe: &FrontEndModel, sample_rate: f64, n: usize) -> Result<Vec<f64>, SimError> {
    check_len(n)?;
    let ratio = f64::from(fe.prescaler_ratio.ok_or(SimError::NoPrescaler(fe.kind))?);
    let profile = drive.profile(fe);
    let base_rate = fe.f_base / ratio;
    Ok((0..n)
        .map(|j| {
            let t = sample_time(j, sample_rate);
            let cycles = (base_rate * t).rem_euclid(1.0) + profile.offset_phase(t) / ratio;
            PRESCALER_AMPLITUDE * (TAU * cycles.rem_euclid(1.0)).sin()
        })
        .collect())
}

fn add_noise(channels: &mut [Vec<f64>], std: f64, seed: u64) {
    if std == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("noise_std validated");
    for ch in channels.iter_mut() {
        for v in ch.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
}

/// Prescaler path into ADC channel 1: band limiting, noise, no quantization.
pub fn prescaler_analog(
    drive: &Drive,
    fe: &FrontEndModel,
    noise_std: f64,
    decimation: Decimation,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SimError> {
    let fs = decimation.sample_rate();
    let mut ch = prescaler_output(drive, fe, fs, n)?;
    let ratio = f64::from(fe.prescaler_ratio.ok_or(SimError::NoPrescaler(fe.kind))?);
    let cutoff = decimation.cutoff();
    for (j, v) in ch.iter_mut().enumerate() {
        let f = fe.rf_frequency(drive.voltage_at(sample_time(j, fs))) / ratio;
        if f > cutoff {
            *v = 0.0;
        }
    }
    let mut channels = vec![ch];
    add_noise(&mut channels, noise_std, seed);
    Ok(channels)
}

/// Quantized prescaler capture on ADC channel 1.
pub fn acquire_prescaler(
    drive: &Drive,
    fe: &FrontEndModel,
    noise_std: f64,
    decimation: Decimation,
    n: usize,
    seed: u64,
) -> Result<Capture, SimError> {
    Capture::from_analog(prescaler_analog(drive, fe, noise_std, decimation, n, seed)?, decimation)
}

/// Dechirped receive signal before quantization.
///
/// Each target contributes a tone whose phase (in cycles) is
/// `f_rf(t)·2r/c + f_D·t` with `f_D = 2·v·f_c/c` and `f_c` the RF at the
/// middle of the voltage span: the range term gives the beat `2·S·r/c`
/// within a chirp, the Doppler term the per-chirp phase step `f_D·T_c`
/// (stop-and-hop). The IQ front end yields `I = A cos φ`, `Q = A sin φ`;
/// the two-channel front end yields `A cos φ` and `A cos(φ + ψ)` with
/// `ψ = 2π·(d/λ)·sin θ`. Components whose instantaneous beat frequency
/// lies outside the acquisition passband are suppressed sample by sample.
pub fn simulate_rx_analog(
    drive: &Drive,
    fe: &FrontEndModel,
    scene: &Scene,
    decimation: Decimation,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SimError> {
    check_len(n)?;
    fe.validate()?;
    scene.validate()?;
    let fs = decimation.sample_rate();
    let cutoff = decimation.cutoff();
    let profile = drive.profile(fe);
    let f_c = drive.ramp().center_frequency(fe);
    let lambda = SPEED_OF_LIGHT / f_c;

    let mut ch1 = vec![0.0; n];
    let mut ch2 = vec![0.0; n];

    for (j, (a, b)) in ch1.iter_mut().zip(ch2.iter_mut()).enumerate() {
        let t = sample_time(j, fs);
        let f_rf = profile.frequency(t);
        let chirp_rate = profile.chirp_rate(t);
        for tgt in &scene.targets {
            let delay = 2.0 * tgt.range_m / SPEED_OF_LIGHT;
            let f_doppler = 2.0 * tgt.velocity_mps * f_c / SPEED_OF_LIGHT;
            let f_beat = chirp_rate * delay + f_doppler;
            if f_beat.abs() > cutoff {
                continue;
            }
            let cycles = (f_rf * delay).rem_euclid(1.0) + (f_doppler * t).rem_euclid(1.0);
            let phi = TAU * cycles;
            if fe.is_iq() {
                *a += tgt.amplitude * phi.cos();
                *b += tgt.amplitude * phi.sin();
            } else {
                let d = fe.rx_spacing.unwrap_or(lambda / 2.0);
                let psi = TAU * d / lambda * tgt.bearing_deg.to_radians().sin();
                *a += tgt.amplitude * phi.cos();
                *b += tgt.amplitude * (phi + psi).cos();
            }
        }
        if scene.coupling_amplitude != 0.0 {
            *a += scene.coupling_amplitude;
            if !fe.is_iq() {
                *b += scene.coupling_amplitude;
            }
        }
    }

    let mut channels = vec![ch1, ch2];
    add_noise(&mut channels, scene.noise_std, seed);
    Ok(channels)
}

/// Full receive chain: [`simulate_rx_analog`] followed by 14-bit quantization.
pub fn simulate_rx(
    drive: &Drive,
    fe: &FrontEndModel,
    scene: &Scene,
    decimation: Decimation,
    n: usize,
    seed: u64,
) -> Result<Capture, SimError> {
    Capture::from_analog(simulate_rx_analog(drive, fe, scene, decimation, n, seed)?, decimation)
}
