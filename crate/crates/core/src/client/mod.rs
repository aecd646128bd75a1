//! SCPI client and the two experiment orchestrators.
//!
//! Both experiments run `configure → upload → route → arm → trigger → read`
//! against an instrument (the emulator in [`crate::server`] or hardware
//! speaking the same dialect), analyse the capture with [`crate::dsp`] and
//! write CSV tables plus a `report.json` into the output directory.

mod config;
mod connection;
mod experiments;

pub use config::{Experiment, ExperimentConfig};
pub use connection::{ScpiClient, DEFAULT_TIMEOUT};
pub use experiments::{
    analyze_chirp_characterization, analyze_chirp_sequence, run_chirp_characterization, run_chirp_characterization_on,
    run_chirp_sequence, run_chirp_sequence_on, run_experiment, sequence_params, ChirpCharAnalysis, ChirpCharReport,
    ChirpSeqAnalysis, ChirpSeqReport, DetectionRecord, ExperimentReport, REPORT_FILE,
};

use thiserror::Error;

use crate::dsp::DspError;

#[derive(Debug, Error)]
pub enum ClientError {
    /// Parameters rejected before any network traffic.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("network: {0}")]
    Network(String),
    /// `ERR:` reply, message passed through verbatim.
    #[error("instrument rejected {command}: ERR:{code},{message}")]
    Instrument { command: String, code: i32, message: String },
    /// Reply that does not fit the dialect.
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("analysis: {0}")]
    Analysis(#[from] DspError),
    #[error("writing results: {0}")]
    Output(String),
}

impl From<std::io::Error> for ClientError {
    fn from(e: std::io::Error) -> Self {
        Self::Network(e.to_string())
    }
}

impl ClientError {
    /// Process exit status for the command-line front end: 1 usage,
    /// 2 protocol/network, 3 analysis or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Network(_) | Self::Instrument { .. } | Self::Protocol(_) => 2,
            Self::Analysis(_) | Self::Output(_) => 3,
        }
    }
}
