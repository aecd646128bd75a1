use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::thread;
use std::time::Duration;

use log::debug;

use super::ErrorCode;
use crate::scpi::{parse_message_bytes, ScpiCommand, ScpiResponse, ScpiValue};
use crate::sim::{
    acquire_prescaler, simulate_rx, Capture, Decimation, Drive, FrontEndKind, FrontEndModel, Playback, Scene,
    SceneFile, SimError, TuningRamp,
};
use crate::{ADC_BASE_RATE, BUFFER_SAMPLES};

/// Real hardware needs at least this long between acquisitions.
pub const HARDWARE_REPETITION: Duration = Duration::from_millis(450);

/// Default waveform repetition rate of the generator, Hz.
pub const DEFAULT_GENERATOR_FREQUENCY: f64 = 1000.0;

/// Which front-end signals are wired to the ADC inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Routing {
    /// Divided VCO signal on channel 1 (IVS-947).
    Prescaler,
    /// I on channel 1, Q on channel 2 (IVS-947).
    Iq,
    /// Two real receive channels (IVS-565).
    DualReal,
}

impl Routing {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Prescaler => "PRESCALER",
            Self::Iq => "IQ",
            Self::DualReal => "DUALREAL",
        }
    }

    /// Wiring used until `SIM:ROUTE` says otherwise.
    pub fn default_for(kind: FrontEndKind) -> Self {
        match kind {
            FrontEndKind::Ivs947 => Self::Iq,
            FrontEndKind::Ivs565 => Self::DualReal,
        }
    }

    pub fn supported_by(self, kind: FrontEndKind) -> bool {
        matches!(
            (self, kind),
            (Self::Prescaler | Self::Iq, FrontEndKind::Ivs947) | (Self::DualReal, FrontEndKind::Ivs565)
        )
    }
}

impl fmt::Display for Routing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Routing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "PRESCALER" => Ok(Self::Prescaler),
            "IQ" => Ok(Self::Iq),
            "DUALREAL" => Ok(Self::DualReal),
            _ => Err(format!("unknown routing {s:?}; expected PRESCALER, IQ or DUALREAL")),
        }
    }
}

/// Startup configuration shared by every session.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub front_end: FrontEndModel,
    pub scene: Scene,
    pub seed: u64,
    /// Sleep [`HARDWARE_REPETITION`] on every trigger.
    pub emulate_latency: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { front_end: FrontEndModel::ivs947(), scene: Scene::empty(), seed: 0, emulate_latency: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFunction {
    Sine,
    Arbitrary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorState {
    pub function: GeneratorFunction,
    /// Uploaded samples, volts.
    pub waveform: Option<Vec<f64>>,
    pub burst_mode: bool,
    pub burst_cycles: u32,
    /// Repetition rate of one waveform period, Hz.
    pub frequency: f64,
}

impl Default for GeneratorState {
    fn default() -> Self {
        Self {
            function: GeneratorFunction::Sine,
            waveform: None,
            burst_mode: false,
            burst_cycles: 1,
            frequency: DEFAULT_GENERATOR_FREQUENCY,
        }
    }
}

impl GeneratorState {
    /// Ready to play: arbitrary function with a waveform loaded.
    pub fn armed(&self) -> bool {
        self.function == GeneratorFunction::Arbitrary && self.waveform.is_some()
    }

    fn drive(&self) -> Result<Drive, SimError> {
        let samples = self.waveform.clone().ok_or_else(|| SimError::InvalidRamp("no waveform".into()))?;
        let rate = self.frequency * samples.len() as f64;
        let ramp = TuningRamp::from_upload(samples, rate)?;
        let playback =
            if self.burst_mode { Playback::Burst { cycles: self.burst_cycles } } else { Playback::Continuous };
        Drive::new(ramp, playback)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcquisitionStatus {
    Idle,
    Armed,
    Triggered,
    Complete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionState {
    pub decimation: Decimation,
    pub buffer: Option<Capture>,
    pub status: AcquisitionStatus,
}

impl Default for AcquisitionState {
    fn default() -> Self {
        Self { decimation: Decimation::default(), buffer: None, status: AcquisitionStatus::Idle }
    }
}

type Reply = Result<ScpiResponse, (ErrorCode, String)>;

fn fail<T>(code: ErrorCode, msg: impl Into<String>) -> Result<T, (ErrorCode, String)> {
    Err((code, msg.into()))
}

/// Instrument state of one client connection.
#[derive(Debug, Clone)]
pub struct Session {
    config: ServerConfig,
    front_end: FrontEndModel,
    scene: Scene,
    routing: Routing,
    seed: u64,
    triggers: u64,
    generator: GeneratorState,
    acquisition: AcquisitionState,
}

impl Session {
    pub fn new(config: ServerConfig) -> Self {
        let routing = Routing::default_for(config.front_end.kind);
        Self {
            front_end: config.front_end.clone(),
            scene: config.scene.clone(),
            routing,
            seed: config.seed,
            triggers: 0,
            generator: GeneratorState::default(),
            acquisition: AcquisitionState::default(),
            config,
        }
    }

    pub fn front_end(&self) -> &FrontEndModel {
        &self.front_end
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn routing(&self) -> Routing {
        self.routing
    }

    pub fn generator(&self) -> &GeneratorState {
        &self.generator
    }

    pub fn acquisition(&self) -> &AcquisitionState {
        &self.acquisition
    }

    /// Parses and executes one line (terminator already stripped).
    pub fn handle_line(&mut self, line: &[u8]) -> ScpiResponse {
        match parse_message_bytes(line) {
            Ok(cmd) => self.handle_command(&cmd),
            Err(e) => ErrorCode::Syntax.response(&e.to_string()),
        }
    }

    pub fn handle_command(&mut self, cmd: &ScpiCommand) -> ScpiResponse {
        debug!("<- {}", abbreviate(&cmd.serialize()));
        let reply = self.dispatch(cmd).unwrap_or_else(|(code, msg)| code.response(&msg));
        debug!("-> {}", abbreviate(reply.payload()));
        reply
    }

    fn dispatch(&mut self, cmd: &ScpiCommand) -> Reply {
        let key = cmd.header_key();
        let query = cmd.is_query();
        // only the channel-carrying mnemonic may have a numeric suffix
        let channel_pos = if key.starts_with("SOUR:") {
            Some(0)
        } else if key == "ACQ:SOUR:DATA" {
            Some(1)
        } else {
            None
        };
        let path = cmd.path();
        if path.iter().enumerate().any(|(i, m)| m.suffix().is_some() && Some(i) != channel_pos) {
            let header: Vec<String> = path.iter().map(ToString::to_string).collect();
            return fail(ErrorCode::UnknownCommand, format!("unknown command {}", header.join(":")));
        }
        let suffix = channel_pos.and_then(|i| path[i].suffix());
        match (key.as_str(), query) {
            ("*IDN", true) => {
                no_args(cmd)?;
                Ok(ScpiResponse::value(format!(
                    "RADAR-KIT,STEMlab 125-14 emulator,{},{}",
                    self.front_end.kind,
                    env!("CARGO_PKG_VERSION")
                )))
            }
            ("*RST", false) => {
                no_args(cmd)?;
                *self = Self::new(self.config.clone());
                Ok(ScpiResponse::ok())
            }
            ("GEN:RST", false) => {
                no_args(cmd)?;
                self.generator = GeneratorState::default();
                Ok(ScpiResponse::ok())
            }
            ("SOUR:FUNC", _) => {
                generator_channel(suffix)?;
                if query {
                    no_args(cmd)?;
                    let name = match self.generator.function {
                        GeneratorFunction::Sine => "SINE",
                        GeneratorFunction::Arbitrary => "ARBITRARY",
                    };
                    return Ok(ScpiResponse::value(name));
                }
                let f = keyword_arg(cmd)?;
                match f.to_ascii_uppercase().as_str() {
                    "ARBITRARY" | "ARBI" => self.generator.function = GeneratorFunction::Arbitrary,
                    "SINE" => self.generator.function = GeneratorFunction::Sine,
                    _ => return fail(ErrorCode::OutOfRange, format!("function {f} not emulated; use ARBITRARY")),
                }
                Ok(ScpiResponse::ok())
            }
            ("SOUR:TRAC:DATA:DATA", false) => {
                generator_channel(suffix)?;
                let samples = waveform_arg(cmd)?;
                self.generator.waveform = Some(samples);
                Ok(ScpiResponse::ok())
            }
            ("SOUR:BURS:STAT", _) => {
                generator_channel(suffix)?;
                if query {
                    no_args(cmd)?;
                    return Ok(ScpiResponse::value(if self.generator.burst_mode { "BURST" } else { "CONTINUOUS" }));
                }
                let mode = keyword_arg(cmd)?;
                match mode.to_ascii_uppercase().as_str() {
                    "BURST" | "ON" => self.generator.burst_mode = true,
                    "CONTINUOUS" | "OFF" => self.generator.burst_mode = false,
                    _ => {
                        return fail(ErrorCode::OutOfRange, format!("burst state {mode}; expected BURST or CONTINUOUS"))
                    }
                }
                Ok(ScpiResponse::ok())
            }
            ("SOUR:BURS:NCYC", _) => {
                generator_channel(suffix)?;
                if query {
                    no_args(cmd)?;
                    return Ok(ScpiResponse::value(self.generator.burst_cycles.to_string()));
                }
                let n = int_arg(cmd)?;
                if !(1..=i64::from(u16::MAX)).contains(&n) {
                    return fail(ErrorCode::OutOfRange, format!("burst cycles {n} outside 1..=65535"));
                }
                self.generator.burst_cycles = n as u32;
                Ok(ScpiResponse::ok())
            }
            ("SOUR:FREQ:FIX", _) => {
                generator_channel(suffix)?;
                if query {
                    no_args(cmd)?;
                    return Ok(ScpiResponse::value(self.generator.frequency.to_string()));
                }
                let f = number_arg(cmd)?;
                if !(f > 0.0 && f.is_finite()) {
                    return fail(ErrorCode::OutOfRange, format!("frequency {f} Hz must be positive"));
                }
                self.generator.frequency = f;
                Ok(ScpiResponse::ok())
            }
            ("ACQ:RST", false) => {
                no_args(cmd)?;
                self.acquisition = AcquisitionState::default();
                Ok(ScpiResponse::ok())
            }
            ("ACQ:DEC", true) => {
                no_args(cmd)?;
                Ok(ScpiResponse::value(self.acquisition.decimation.to_string()))
            }
            ("ACQ:DEC", false) => {
                let d = int_arg(cmd)?;
                let d = u32::try_from(d)
                    .ok()
                    .and_then(|d| Decimation::new(d).ok())
                    .ok_or((ErrorCode::OutOfRange, format!("decimation {d} not in {:?}", Decimation::ALLOWED)))?;
                self.acquisition.decimation = d;
                Ok(ScpiResponse::ok())
            }
            ("ACQ:START", false) => {
                no_args(cmd)?;
                self.acquisition.buffer = None;
                self.acquisition.status = AcquisitionStatus::Armed;
                Ok(ScpiResponse::ok())
            }
            ("ACQ:TRIG", false) => {
                let src = keyword_arg(cmd)?;
                if !src.eq_ignore_ascii_case("NOW") {
                    return fail(ErrorCode::OutOfRange, format!("trigger source {src} not emulated; use NOW"));
                }
                self.trigger()?;
                Ok(ScpiResponse::ok())
            }
            ("ACQ:TRIG:STAT", true) => {
                no_args(cmd)?;
                let s = if self.acquisition.status == AcquisitionStatus::Complete { "TD" } else { "WAIT" };
                Ok(ScpiResponse::value(s))
            }
            ("ACQ:SOUR:DATA", true) => self.read_channel(cmd, suffix),
            ("SIM:ROUTE", true) => {
                no_args(cmd)?;
                Ok(ScpiResponse::value(self.routing.as_str()))
            }
            ("SIM:ROUTE", false) => {
                let r: Routing = keyword_arg(cmd)?.parse().map_err(|e| (ErrorCode::OutOfRange, e))?;
                if !r.supported_by(self.front_end.kind) {
                    return fail(
                        ErrorCode::Routing,
                        format!("routing {r} is not available on front end {}", self.front_end.kind),
                    );
                }
                self.routing = r;
                Ok(ScpiResponse::ok())
            }
            ("SIM:SCENE:LOAD", false) => {
                let path = text_arg(cmd)?;
                let file = SceneFile::load(Path::new(path)).map_err(|e| (ErrorCode::Scene, e.to_string()))?;
                if file.front_end != self.front_end.kind {
                    self.front_end = FrontEndModel::for_kind(file.front_end);
                    self.routing = Routing::default_for(file.front_end);
                }
                self.scene = file.scene();
                Ok(ScpiResponse::ok())
            }
            ("SIM:SEED", false) => {
                let n = int_arg(cmd)?;
                let n = u64::try_from(n).map_err(|_| (ErrorCode::OutOfRange, format!("seed {n} must be >= 0")))?;
                self.seed = n;
                self.triggers = 0;
                Ok(ScpiResponse::ok())
            }
            ("SIM:SEED", true) => {
                no_args(cmd)?;
                Ok(ScpiResponse::value(self.seed.to_string()))
            }
            _ => fail(ErrorCode::UnknownCommand, format!("unknown command {}{}", key, if query { "?" } else { "" })),
        }
    }

    /// Synchronous start of playback and acquisition at t = 0; the capture is
    /// simulated in one shot.
    fn trigger(&mut self) -> Result<(), (ErrorCode, String)> {
        if self.acquisition.status != AcquisitionStatus::Armed {
            return fail(ErrorCode::State, "acquisition not armed; send ACQ:START first");
        }
        if !self.generator.armed() {
            return fail(ErrorCode::State, "generator needs SOUR1:FUNC ARBITRARY and an uploaded waveform");
        }
        let n = self.generator.waveform.as_ref().map_or(0, Vec::len);
        if !dac_rate_ok(n, self.generator.frequency) {
            return fail(
                ErrorCode::OutOfRange,
                format!("{n} samples at {} Hz exceed the 125 MS/s DAC", self.generator.frequency),
            );
        }
        let drive = self.generator.drive().map_err(|e| (ErrorCode::OutOfRange, e.to_string()))?;
        let seed = trigger_seed(self.seed, self.triggers);
        let dec = self.acquisition.decimation;
        let capture = match self.routing {
            Routing::Prescaler => {
                acquire_prescaler(&drive, &self.front_end, self.scene.noise_std, dec, BUFFER_SAMPLES, seed)
            }
            Routing::Iq | Routing::DualReal => {
                simulate_rx(&drive, &self.front_end, &self.scene, dec, BUFFER_SAMPLES, seed)
            }
        }
        .map_err(|e| (ErrorCode::Simulation, e.to_string()))?;
        if self.config.emulate_latency {
            thread::sleep(HARDWARE_REPETITION);
        }
        self.triggers += 1;
        self.acquisition.buffer = Some(capture);
        self.acquisition.status = AcquisitionStatus::Complete;
        Ok(())
    }

    fn read_channel(&self, cmd: &ScpiCommand, suffix: Option<u32>) -> Reply {
        let ch = match suffix {
            Some(1) | None => 0,
            Some(2) => 1,
            Some(n) => return fail(ErrorCode::OutOfRange, format!("no acquisition channel {n}")),
        };
        let count = match cmd.args() {
            [] => BUFFER_SAMPLES,
            [v] => {
                let n = v.as_i64().ok_or((ErrorCode::Argument, "sample count must be an integer".to_string()))?;
                if n > BUFFER_SAMPLES as i64 {
                    return fail(
                        ErrorCode::BufferLimit,
                        format!("{n} samples requested; buffer holds {BUFFER_SAMPLES}"),
                    );
                }
                if n < 1 {
                    return fail(ErrorCode::OutOfRange, format!("sample count {n} must be >= 1"));
                }
                n as usize
            }
            _ => return fail(ErrorCode::Argument, "expected at most one argument"),
        };
        let capture = self
            .acquisition
            .buffer
            .as_ref()
            .filter(|_| self.acquisition.status == AcquisitionStatus::Complete)
            .ok_or((ErrorCode::EmptyBuffer, "no completed acquisition".to_string()))?;
        let data = capture.channel(ch).ok_or((
            ErrorCode::EmptyBuffer,
            format!("channel {} not acquired with routing {}", ch + 1, self.routing),
        ))?;
        Ok(ScpiResponse::array(&data[..count.min(data.len())]))
    }
}

/// Distinct, reproducible noise seed for the n-th trigger of a session.
fn trigger_seed(seed: u64, n: u64) -> u64 {
    seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn abbreviate(s: &str) -> String {
    const MAX: usize = 80;
    if s.len() <= MAX {
        return s.to_string();
    }
    let cut = (0..=MAX).rev().find(|i| s.is_char_boundary(*i)).unwrap_or(0);
    format!("{}... ({} bytes)", &s[..cut], s.len())
}

fn generator_channel(suffix: Option<u32>) -> Result<(), (ErrorCode, String)> {
    match suffix {
        Some(1) | None => Ok(()),
        Some(n) => fail(ErrorCode::OutOfRange, format!("generator channel {n} not emulated; use SOUR1")),
    }
}

fn no_args(cmd: &ScpiCommand) -> Result<(), (ErrorCode, String)> {
    if cmd.args().is_empty() {
        Ok(())
    } else {
        fail(ErrorCode::Argument, format!("{} takes no arguments", cmd.header_key()))
    }
}

fn single_arg(cmd: &ScpiCommand) -> Result<&ScpiValue, (ErrorCode, String)> {
    match cmd.args() {
        [v] => Ok(v),
        args => fail(ErrorCode::Argument, format!("{} takes one argument, got {}", cmd.header_key(), args.len())),
    }
}

fn keyword_arg(cmd: &ScpiCommand) -> Result<&str, (ErrorCode, String)> {
    match single_arg(cmd)? {
        ScpiValue::Keyword(k) => Ok(k),
        _ => fail(ErrorCode::Argument, format!("{} expects a keyword", cmd.header_key())),
    }
}

fn text_arg(cmd: &ScpiCommand) -> Result<&str, (ErrorCode, String)> {
    single_arg(cmd)?.as_text().ok_or((ErrorCode::Argument, format!("{} expects a path", cmd.header_key())))
}

fn int_arg(cmd: &ScpiCommand) -> Result<i64, (ErrorCode, String)> {
    single_arg(cmd)?.as_i64().ok_or((ErrorCode::Argument, format!("{} expects an integer", cmd.header_key())))
}

fn number_arg(cmd: &ScpiCommand) -> Result<f64, (ErrorCode, String)> {
    single_arg(cmd)?.as_f64().ok_or((ErrorCode::Argument, format!("{} expects a number", cmd.header_key())))
}

fn waveform_arg(cmd: &ScpiCommand) -> Result<Vec<f64>, (ErrorCode, String)> {
    let samples: Vec<f64> = match cmd.args() {
        [ScpiValue::Array(items)] => items.iter().map(|d| d.to_f64()).collect(),
        [v] => vec![v.as_f64().ok_or((ErrorCode::Argument, "waveform samples must be numeric".to_string()))?],
        [] => return fail(ErrorCode::Argument, "empty waveform"),
        _ => return fail(ErrorCode::Argument, "waveform samples must be numeric"),
    };
    if samples.len() > BUFFER_SAMPLES {
        return fail(
            ErrorCode::BufferLimit,
            format!("{} samples uploaded; generator buffer holds {BUFFER_SAMPLES}", samples.len()),
        );
    }
    if let Some(v) = samples.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
        return fail(ErrorCode::OutOfRange, format!("sample {v} V outside the 0..1 V tuning range"));
    }
    Ok(samples)
}

/// DAC playback rate limit for a waveform of `n` samples at `frequency`.
pub fn dac_rate_ok(n: usize, frequency: f64) -> bool {
    n as f64 * frequency <= ADC_BASE_RATE
}
