use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use num_complex::Complex;
use serde::Serialize;

use super::{ClientError, Experiment, ExperimentConfig, ScpiClient};
use crate::dsp::{
    detect_peaks, doa_phase_comparison, export, range_doppler, stft, track_instantaneous_frequency, DspError,
};
use crate::server::Routing;
use crate::sim::{FrontEndKind, FrontEndModel, TuningRamp, PRESCALER_RATIO};
use crate::{Detection, InstFreqTrack, RadarParams, RangeDopplerMap, Spectrogram, BUFFER_SAMPLES, SPEED_OF_LIGHT};

/// Spectrogram rows exported on each side of the measured ridge.
const SPECTROGRAM_MARGIN_BINS: f64 = 24.0;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone)]
pub struct ChirpCharAnalysis {
    pub spectrogram: Spectrogram,
    pub track: InstFreqTrack,
    pub prescaler_ratio: u32,
}

impl ChirpCharAnalysis {
    pub fn rf_slope(&self) -> f64 {
        self.track.slope() * f64::from(self.prescaler_ratio)
    }
}

/// STFT, per-frame peak interpolation and line fit over the frames that lie
/// inside the upsweep `[0, cfg.ramp_duration]`.
pub fn analyze_chirp_characterization(
    samples: &[f64],
    sample_rate: f64,
    cfg: &ExperimentConfig,
    prescaler_ratio: u32,
) -> Result<ChirpCharAnalysis, DspError> {
    let spectrogram = stft(samples, sample_rate, &cfg.stft)?;
    let window = cfg.stft.window_length as f64 / sample_rate;
    let track = track_instantaneous_frequency(&spectrogram, window, 0.0, cfg.ramp_duration)?;
    Ok(ChirpCharAnalysis { spectrogram, track, prescaler_ratio })
}

#[derive(Debug, Clone)]
pub struct ChirpSeqAnalysis {
    pub params: RadarParams,
    pub map: RangeDopplerMap,
    /// Map of the second real channel (two-channel front end only).
    pub second_map: Option<RangeDopplerMap>,
    pub detections: Vec<Detection>,
    /// Phase-comparison bearing per detection, degrees (two-channel only).
    pub bearings: Vec<Option<f64>>,
}

/// Nominal waveform parameters of the chirp sequence for a front end.
pub fn sequence_params(cfg: &ExperimentConfig, fe: &FrontEndModel) -> RadarParams {
    RadarParams {
        bandwidth: fe.rf_frequency(cfg.v_hi) - fe.rf_frequency(cfg.v_lo),
        chirp_duration: cfg.chirp_duration(),
        center_frequency: fe.rf_frequency((cfg.v_lo + cfg.v_hi) / 2.0),
        sample_rate: cfg.sample_rate(),
    }
}

/// Range-Doppler processing of one capture. IQ captures are combined as
/// `ch1 + j·ch2`; with [`Routing::DualReal`] each channel is transformed on
/// its own and detections carry a phase-comparison bearing.
pub fn analyze_chirp_sequence(
    ch1: &[f64],
    ch2: &[f64],
    routing: Routing,
    cfg: &ExperimentConfig,
    fe: &FrontEndModel,
) -> Result<ChirpSeqAnalysis, DspError> {
    let params = sequence_params(cfg, fe);
    let layout = cfg.layout();
    let real = |x: &[f64]| x.iter().map(|v| Complex::new(*v, 0.0)).collect::<Vec<_>>();
    let (map, second_map) = match routing {
        Routing::DualReal => {
            (range_doppler(&real(ch1), layout, params)?, Some(range_doppler(&real(ch2), layout, params)?))
        }
        _ => {
            let iq: Vec<_> = ch1.iter().zip(ch2).map(|(i, q)| Complex::new(*i, *q)).collect();
            (range_doppler(&iq, layout, params)?, None)
        }
    };
    let detections = detect_peaks(&map, &cfg.peaks);
    let bearings = match (&second_map, fe.rx_spacing) {
        (Some(m2), Some(d)) => {
            let lambda = SPEED_OF_LIGHT / params.center_frequency;
            detections
                .iter()
                .map(|det| doa_phase_comparison(det.value, m2.value(det.range_bin, det.doppler_bin), d, lambda).ok())
                .collect()
        }
        _ => vec![None; detections.len()],
    };
    Ok(ChirpSeqAnalysis { params, map, second_map, detections, bearings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChirpCharReport {
    pub experiment: &'static str,
    pub front_end: String,
    pub decimation: u32,
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub stft_window_length: usize,
    pub stft_hop: usize,
    pub stft_fft_length: usize,
    pub prescaler_ratio: u32,
    pub n_points: usize,
    pub prescaler_slope_hz_per_s: f64,
    pub prescaler_intercept_hz: f64,
    pub rf_slope_hz_per_s: f64,
    /// Fitted RF slope times the ramp duration.
    pub rf_bandwidth_hz: f64,
    /// Bandwidth of the nominal VCO characteristic over the voltage span.
    pub expected_rf_bandwidth_hz: f64,
    pub residual_rms_hz: f64,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionRecord {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub magnitude_db: f64,
    pub range_bin: usize,
    pub doppler_bin: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bearing_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChirpSeqReport {
    pub experiment: &'static str,
    pub front_end: String,
    pub routing: String,
    pub decimation: u32,
    pub sample_rate_hz: f64,
    pub n_chirps: usize,
    pub n_range_bins: usize,
    pub n_doppler_bins: usize,
    pub skip: usize,
    pub bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    pub center_frequency_hz: f64,
    pub range_per_bin_m: f64,
    pub velocity_per_bin_mps: f64,
    pub max_unambiguous_velocity_mps: f64,
    pub threshold_db: f64,
    pub min_snr_db: f64,
    pub detections: Vec<DetectionRecord>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentReport {
    ChirpChar(ChirpCharReport),
    ChirpSeq(ChirpSeqReport),
}

impl ExperimentReport {
    pub fn artifacts(&self) -> &[String] {
        match self {
            Self::ChirpChar(r) => &r.artifacts,
            Self::ChirpSeq(r) => &r.artifacts,
        }
    }

    /// One-paragraph human summary.
    pub fn summary(&self) -> String {
        match self {
            Self::ChirpChar(r) => format!(
                "chirp characterization: prescaler slope {:.6e} Hz/s, RF slope {:.6e} Hz/s, \
                 RF sweep {:.3} MHz (nominal {:.3} MHz), residual RMS {:.2} Hz over {} frames",
                r.prescaler_slope_hz_per_s,
                r.rf_slope_hz_per_s,
                r.rf_bandwidth_hz / 1e6,
                r.expected_rf_bandwidth_hz / 1e6,
                r.residual_rms_hz,
                r.n_points
            ),
            Self::ChirpSeq(r) => {
                let mut s = format!(
                    "chirp sequence: {}x{} map, {:.4} m/bin, {:.4} m/s per bin, {} detection(s)",
                    r.n_range_bins,
                    r.n_doppler_bins,
                    r.range_per_bin_m,
                    r.velocity_per_bin_mps,
                    r.detections.len()
                );
                for d in &r.detections {
                    s.push_str(&format!(
                        "\n  r = {:.3} m, v = {:.4} m/s, {:.1} dB",
                        d.range_m, d.velocity_mps, d.magnitude_db
                    ));
                    if let Some(b) = d.bearing_deg {
                        s.push_str(&format!(", bearing {b:.2} deg"));
                    }
                }
                s
            }
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ClientError> {
    match cfg.experiment {
        Experiment::ChirpChar => run_chirp_characterization(cfg).map(ExperimentReport::ChirpChar),
        Experiment::ChirpSeq => run_chirp_sequence(cfg).map(ExperimentReport::ChirpSeq),
    }
}

/// Uploads the single upsweep, captures the prescaler output, fits the
/// instantaneous-frequency ramp and writes `spectrogram.csv`, `track.csv`
/// and `report.json`.
pub fn run_chirp_characterization(cfg: &ExperimentConfig) -> Result<ChirpCharReport, ClientError> {
    check_experiment(cfg, Experiment::ChirpChar)?;
    let mut client = ScpiClient::connect(&cfg.host, cfg.port, cfg.timeout)?;
    run_chirp_characterization_on(&mut client, cfg)
}

/// [`run_chirp_characterization`] over an open connection, whatever state
/// its session is in.
pub fn run_chirp_characterization_on(
    client: &mut ScpiClient,
    cfg: &ExperimentConfig,
) -> Result<ChirpCharReport, ClientError> {
    check_experiment(cfg, Experiment::ChirpChar)?;
    let ramp = TuningRamp::linear_upsweep(cfg.v_lo, cfg.v_hi, cfg.ramp_duration, cfg.dac_samples)
        .map_err(|e| ClientError::Config(e.to_string()))?;
    let kind = front_end(client, cfg)?;
    configure(client, cfg, Routing::Prescaler, ramp.samples())?;
    let samples = acquire(client, 1)?;

    let fe = FrontEndModel::for_kind(kind);
    let ratio = fe.prescaler_ratio.unwrap_or(PRESCALER_RATIO);
    let analysis = analyze_chirp_characterization(&samples, cfg.sample_rate(), cfg, ratio)?;
    let track = &analysis.track;

    let spec_csv = render(|buf| {
        let lo = track.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = track.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let margin = SPECTROGRAM_MARGIN_BINS * analysis.spectrogram.bin_spacing();
        export::write_spectrogram(buf, &analysis.spectrogram, Some((lo - margin, hi + margin)))
    })?;
    let track_csv = render(|buf| export::write_track(buf, track))?;

    let report = ChirpCharReport {
        experiment: Experiment::ChirpChar.as_str(),
        front_end: kind.to_string(),
        decimation: cfg.decimation,
        sample_rate_hz: cfg.sample_rate(),
        n_samples: samples.len(),
        stft_window_length: cfg.stft.window_length,
        stft_hop: cfg.stft.hop,
        stft_fft_length: cfg.stft.fft_length,
        prescaler_ratio: ratio,
        n_points: track.points.len(),
        prescaler_slope_hz_per_s: track.slope(),
        prescaler_intercept_hz: track.intercept(),
        rf_slope_hz_per_s: analysis.rf_slope(),
        rf_bandwidth_hz: analysis.rf_slope() * cfg.ramp_duration,
        expected_rf_bandwidth_hz: fe.rf_frequency(cfg.v_hi) - fe.rf_frequency(cfg.v_lo),
        residual_rms_hz: track.fit.residual_rms(),
        artifacts: vec!["spectrogram.csv".into(), "track.csv".into(), REPORT_FILE.into()],
    };
    let json = report_json(&report)?;
    write_artifacts(&cfg.out_dir, &[("spectrogram.csv", spec_csv), ("track.csv", track_csv), (REPORT_FILE, json)])?;
    info!("{}", ExperimentReport::ChirpChar(report.clone()).summary());
    Ok(report)
}

/// Uploads the chirp sequence, captures both receive channels, builds the
/// range-Doppler map and writes `range_doppler.csv`, `detections.csv` and
/// `report.json`.
pub fn run_chirp_sequence(cfg: &ExperimentConfig) -> Result<ChirpSeqReport, ClientError> {
    check_experiment(cfg, Experiment::ChirpSeq)?;
    let mut client = ScpiClient::connect(&cfg.host, cfg.port, cfg.timeout)?;
    run_chirp_sequence_on(&mut client, cfg)
}

/// [`run_chirp_sequence`] over an open connection, whatever state its
/// session is in.
pub fn run_chirp_sequence_on(client: &mut ScpiClient, cfg: &ExperimentConfig) -> Result<ChirpSeqReport, ClientError> {
    check_experiment(cfg, Experiment::ChirpSeq)?;
    let per_chirp = cfg.samples_per_chirp();
    let dac_rate = per_chirp as f64 / cfg.chirp_duration();
    let ramp = TuningRamp::chirp_sequence(cfg.v_lo, cfg.v_hi, cfg.n_chirps, per_chirp, dac_rate)
        .map_err(|e| ClientError::Config(e.to_string()))?;
    let kind = front_end(client, cfg)?;
    let routing = cfg.routing.unwrap_or(Routing::default_for(kind));
    configure(client, cfg, routing, ramp.samples())?;
    let ch1 = acquire(client, 1)?;
    let ch2 = acquire(client, 2)?;

    let fe = FrontEndModel::for_kind(kind);
    let analysis = analyze_chirp_sequence(&ch1, &ch2, routing, cfg, &fe)?;
    let map_csv = render(|buf| export::write_range_doppler(buf, &analysis.map))?;
    let det_csv = render(|buf| export::write_detections(buf, &analysis.detections))?;

    let detections = analysis
        .detections
        .iter()
        .zip(&analysis.bearings)
        .map(|(d, b)| DetectionRecord {
            range_m: d.range_m,
            velocity_mps: d.velocity_mps,
            magnitude_db: d.magnitude_db.max(export::MAG_DB_FLOOR),
            range_bin: d.range_bin,
            doppler_bin: d.doppler_bin,
            bearing_deg: *b,
        })
        .collect();
    let p = &analysis.params;
    let report = ChirpSeqReport {
        experiment: Experiment::ChirpSeq.as_str(),
        front_end: kind.to_string(),
        routing: routing.to_string(),
        decimation: cfg.decimation,
        sample_rate_hz: cfg.sample_rate(),
        n_chirps: cfg.n_chirps,
        n_range_bins: analysis.map.n_range_bins(),
        n_doppler_bins: analysis.map.n_doppler_bins(),
        skip: cfg.skip,
        bandwidth_hz: p.bandwidth,
        chirp_duration_s: p.chirp_duration,
        center_frequency_hz: p.center_frequency,
        range_per_bin_m: analysis.map.range_per_bin(),
        velocity_per_bin_mps: analysis.map.velocity_per_bin(),
        max_unambiguous_velocity_mps: p.max_unambiguous_velocity(),
        threshold_db: cfg.peaks.threshold_db,
        min_snr_db: cfg.peaks.min_snr_db,
        detections,
        artifacts: vec!["range_doppler.csv".into(), "detections.csv".into(), REPORT_FILE.into()],
    };
    let json = report_json(&report)?;
    write_artifacts(&cfg.out_dir, &[("range_doppler.csv", map_csv), ("detections.csv", det_csv), (REPORT_FILE, json)])?;
    info!("{}", ExperimentReport::ChirpSeq(report.clone()).summary());
    Ok(report)
}

fn check_experiment(cfg: &ExperimentConfig, want: Experiment) -> Result<(), ClientError> {
    if cfg.experiment != want {
        return Err(ClientError::Config(format!("configuration is for {}, not {want}", cfg.experiment)));
    }
    cfg.validate()
}

fn front_end(client: &mut ScpiClient, cfg: &ExperimentConfig) -> Result<FrontEndKind, ClientError> {
    let idn = client.identify()?;
    if let Some(kind) = cfg.front_end {
        return Ok(kind);
    }
    idn.split(',').find_map(|field| field.trim().parse::<FrontEndKind>().ok()).ok_or_else(|| {
        ClientError::Config(format!("cannot tell the front end from *IDN? reply {idn:?}; set it explicitly"))
    })
}

fn configure(
    client: &mut ScpiClient,
    cfg: &ExperimentConfig,
    routing: Routing,
    waveform: &[f64],
) -> Result<(), ClientError> {
    client.set("GEN:RST")?;
    client.set("ACQ:RST")?;
    if let Some(seed) = cfg.seed {
        client.set(&format!("SIM:SEED {seed}"))?;
    }
    client.set(&format!("SIM:ROUTE {routing}"))?;
    client.set("SOUR1:FUNC ARBITRARY")?;
    client.set(&format!("SOUR1:FREQ:FIX {}", cfg.generator_frequency()))?;
    client.set("SOUR1:BURS:STAT BURST")?;
    client.set("SOUR1:BURS:NCYC 1")?;
    client.upload_waveform(waveform)?;
    client.set(&format!("ACQ:DEC {}", cfg.decimation))?;
    client.set("ACQ:START")?;
    client.set("ACQ:TRIG NOW")?;
    client.wait_triggered()
}

fn acquire(client: &mut ScpiClient, ch: u8) -> Result<Vec<f64>, ClientError> {
    let data = client.read_channel(ch)?;
    if data.len() != BUFFER_SAMPLES {
        return Err(ClientError::Protocol(format!(
            "channel {ch} returned {} samples, expected {BUFFER_SAMPLES}",
            data.len()
        )));
    }
    Ok(data)
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> export::Result<()>) -> Result<Vec<u8>, ClientError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| ClientError::Output(e.to_string()))?;
    Ok(buf)
}

fn report_json<T: Serialize>(report: &T) -> Result<Vec<u8>, ClientError> {
    let mut json = serde_json::to_vec_pretty(report).map_err(|e| ClientError::Output(e.to_string()))?;
    json.push(b'\n');
    Ok(json)
}

/// Writes every file or none: on failure the files written so far (and the
/// directory, if this call created it) are removed.
fn write_artifacts(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<(), ClientError> {
    let created_dir = !dir.exists();
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| ClientError::Output(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| ClientError::Output(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if created_dir {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}
