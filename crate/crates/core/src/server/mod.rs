//! STEMlab emulator: per-connection [`Session`] state machines behind a
//! `\r\n`-framed TCP listener that serves one client at a time.
//!
//! Every request line gets exactly one response line: `OK` for set-commands,
//! the value for queries, or `ERR:<code>,<message>`.

mod session;
mod tcp;

pub use session::{
    dac_rate_ok, AcquisitionState, AcquisitionStatus, GeneratorFunction, GeneratorState, Routing, ServerConfig,
    Session, DEFAULT_GENERATOR_FREQUENCY, HARDWARE_REPETITION,
};
pub use tcp::{port_from_env, InstrumentServer, ServerHandle, DEFAULT_PORT, MAX_LINE_BYTES, PORT_ENV};

use crate::scpi::ScpiResponse;

/// Numeric codes carried in `ERR:<code>,<message>` responses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    /// The line does not parse.
    Syntax = 100,
    UnknownCommand = 101,
    /// Wrong number or kind of arguments.
    Argument = 102,
    OutOfRange = 103,
    /// More than 16384 samples uploaded or requested.
    BufferLimit = 104,
    /// Command not valid in the current state (e.g. trigger before arming).
    State = 105,
    /// Read with no completed acquisition on that channel.
    EmptyBuffer = 106,
    /// Routing not supported by the front end.
    Routing = 107,
    Scene = 108,
    LineTooLong = 109,
    /// Another client holds the instrument.
    Busy = 110,
    Simulation = 111,
}

impl ErrorCode {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_code(code: i32) -> Option<Self> {
        use ErrorCode::*;
        [
            Syntax,
            UnknownCommand,
            Argument,
            OutOfRange,
            BufferLimit,
            State,
            EmptyBuffer,
            Routing,
            Scene,
            LineTooLong,
            Busy,
            Simulation,
        ]
        .into_iter()
        .find(|c| c.code() == code)
    }

    pub fn response(self, message: &str) -> ScpiResponse {
        ScpiResponse::error(self.code(), message)
    }
}
