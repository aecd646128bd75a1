use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use radar_kit::client::{run_experiment, ClientError, Experiment, ExperimentConfig};
use radar_kit::server::{InstrumentServer, Routing, ServerConfig, DEFAULT_PORT, PORT_ENV};
use radar_kit::sim::{FrontEndKind, FrontEndModel, Scene, SceneFile};

/// STEMlab 125-14 radar emulator and experiment client.
#[derive(Debug, Parser)]
#[command(name = "radar-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the SCPI instrument emulator.
    Serve(ServeArgs),
    /// Single upsweep through the prescaler: fit the VCO sweep.
    ChirpChar(ChirpCharArgs),
    /// Chirp sequence: range-Doppler map and detections.
    ChirpSeq(ChirpSeqArgs),
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Listen address.
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Scene JSON (targets, noise, front end).
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Overrides the scene file's front end.
    #[arg(long)]
    front_end: Option<FrontEndKind>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sleep 450 ms per trigger like the hardware does.
    #[arg(long)]
    emulate_latency: bool,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Output directory for CSV tables and report.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Per-request timeout, seconds.
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Sent as SIM:SEED before the acquisition.
    #[arg(long)]
    seed: Option<u64>,
    /// Front end; read from *IDN? when omitted.
    #[arg(long)]
    front_end: Option<FrontEndKind>,
    /// PRESCALER, IQ or DUALREAL; defaults to the front end's wiring.
    #[arg(long)]
    routing: Option<Routing>,
    /// ADC decimation: 1, 8, 64, 1024, 8192 or 65536.
    #[arg(long)]
    decimation: Option<u32>,
    /// Tuning voltage at the start of each chirp, V.
    #[arg(long)]
    v_lo: Option<f64>,
    /// Tuning voltage at the end of each chirp, V.
    #[arg(long)]
    v_hi: Option<f64>,
}

#[derive(Debug, Args)]
struct ChirpCharArgs {
    #[command(flatten)]
    common: Common,
    /// Upsweep duration, s.
    #[arg(long)]
    ramp_duration: Option<f64>,
    #[arg(long)]
    dac_samples: Option<usize>,
    /// STFT window length.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    hop: Option<usize>,
    /// Zero-padded transform size.
    #[arg(long)]
    fft_length: Option<usize>,
}

#[derive(Debug, Args)]
struct ChirpSeqArgs {
    #[command(flatten)]
    common: Common,
    /// Chirps per sequence; must divide 16384.
    #[arg(long)]
    chirps: Option<usize>,
    /// Leading samples dropped from every chirp.
    #[arg(long)]
    skip: Option<usize>,
    /// Detection threshold below the strongest cell, dB.
    #[arg(long)]
    threshold_db: Option<f64>,
    /// Required margin above the median noise floor, dB.
    #[arg(long)]
    min_snr_db: Option<f64>,
    /// Most detections to report.
    #[arg(long)]
    max_peaks: Option<usize>,
}

fn apply_common(cfg: &mut ExperimentConfig, c: Common) -> Result<(), ClientError> {
    if !(c.timeout > 0.0 && c.timeout.is_finite()) {
        return Err(ClientError::Config(format!("timeout {} s must be positive", c.timeout)));
    }
    cfg.host = c.host;
    cfg.port = c.port;
    cfg.out_dir = c.out;
    cfg.timeout = Duration::from_secs_f64(c.timeout);
    cfg.seed = c.seed;
    cfg.front_end = c.front_end;
    cfg.routing = c.routing;
    if let Some(d) = c.decimation {
        cfg.decimation = d;
    }
    if let Some(v) = c.v_lo {
        cfg.v_lo = v;
    }
    if let Some(v) = c.v_hi {
        cfg.v_hi = v;
    }
    Ok(())
}

fn chirp_char_config(a: ChirpCharArgs) -> Result<ExperimentConfig, ClientError> {
    let mut cfg = ExperimentConfig::for_experiment(Experiment::ChirpChar);
    apply_common(&mut cfg, a.common)?;
    if let Some(t) = a.ramp_duration {
        cfg.ramp_duration = t;
    }
    if let Some(n) = a.dac_samples {
        cfg.dac_samples = n;
    }
    if let Some(n) = a.window {
        cfg.stft.window_length = n;
        if a.fft_length.is_none() {
            cfg.stft.fft_length = cfg.stft.fft_length.max(n);
        }
    }
    if let Some(n) = a.hop {
        cfg.stft.hop = n;
    }
    if let Some(n) = a.fft_length {
        cfg.stft.fft_length = n;
    }
    Ok(cfg)
}

fn chirp_seq_config(a: ChirpSeqArgs) -> Result<ExperimentConfig, ClientError> {
    let mut cfg = ExperimentConfig::for_experiment(Experiment::ChirpSeq);
    apply_common(&mut cfg, a.common)?;
    if let Some(n) = a.chirps {
        cfg.n_chirps = n;
    }
    if let Some(n) = a.skip {
        cfg.skip = n;
    }
    if let Some(db) = a.threshold_db {
        cfg.peaks = cfg.peaks.with_threshold_db(db);
    }
    if let Some(db) = a.min_snr_db {
        cfg.peaks = cfg.peaks.with_min_snr_db(db);
    }
    if let Some(n) = a.max_peaks {
        cfg.peaks = cfg.peaks.with_max_peaks(n);
    }
    Ok(cfg)
}

fn run_client(cfg: Result<ExperimentConfig, ClientError>) -> ExitCode {
    match cfg.and_then(|cfg| run_experiment(&cfg)) {
        Ok(report) => {
            println!("{}", report.summary());
            for a in report.artifacts() {
                println!("wrote {a}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("radar-kit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn serve(a: ServeArgs) -> ExitCode {
    let (scene, file_front_end) = match &a.scene {
        Some(path) => match SceneFile::load(path) {
            Ok(f) => (f.scene(), Some(f.front_end)),
            Err(e) => {
                eprintln!("radar-kit: {e}");
                return ExitCode::from(1);
            }
        },
        None => (Scene::empty(), None),
    };
    let kind = match (a.front_end, file_front_end) {
        (Some(flag), Some(file)) if flag != file => {
            warn!("--front-end {flag} overrides {file} from the scene file");
            flag
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => FrontEndKind::Ivs947,
    };
    let config = ServerConfig {
        front_end: FrontEndModel::for_kind(kind),
        scene,
        seed: a.seed,
        emulate_latency: a.emulate_latency,
    };
    let server = match InstrumentServer::bind((a.bind.as_str(), a.port), config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("radar-kit: cannot listen on {}:{}: {e}", a.bind, a.port);
            return ExitCode::from(2);
        }
    };
    if let Ok(addr) = server.local_addr() {
        info!("{kind} emulator on {addr}");
        println!("listening on {addr}");
    }
    match server.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("radar-kit: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Serve(a) => serve(a),
        Command::ChirpChar(a) => run_client(chirp_char_config(a)),
        Command::ChirpSeq(a) => run_client(chirp_seq_config(a)),
    }
}
