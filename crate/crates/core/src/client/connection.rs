use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, trace};

use super::ClientError;
use crate::scpi::{parse_buffer_values, serialize_f64_array, ScpiResponse, TERMINATOR};
use crate::BUFFER_SAMPLES;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Blocking request/response SCPI connection: one line out, one line back.
#[derive(Debug)]
pub struct ScpiClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    timeout: Duration,
}

impl ScpiClient {
    pub fn connect(host: &str, port: u16, timeout: Duration) -> Result<Self, ClientError> {
        let target = format!("{host}:{port}");
        let addrs: Vec<_> = (host, port)
            .to_socket_addrs()
            .map_err(|e| ClientError::Network(format!("resolve {target}: {e}")))?
            .collect();
        let mut last = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(stream) => return Self::from_stream(stream, timeout),
                Err(e) => last = Some(e),
            }
        }
        Err(ClientError::Network(match last {
            Some(e) => format!("connect {target}: {e}"),
            None => format!("connect {target}: no address"),
        }))
    }

    /// Wraps an already connected stream.
    pub fn from_stream(stream: TcpStream, timeout: Duration) -> Result<Self, ClientError> {
        stream.set_read_timeout(Some(timeout))?;
        stream.set_write_timeout(Some(timeout))?;
        stream.set_nodelay(true)?;
        Ok(Self { reader: BufReader::new(stream.try_clone()?), writer: stream, timeout })
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Sends one line and returns the raw response payload, error or not.
    pub fn exchange(&mut self, line: &str) -> Result<String, ClientError> {
        if line.len() > 120 {
            debug!(
                "<- {}... ({} bytes)",
                &line[..line.char_indices().nth(100).map_or(line.len(), |c| c.0)],
                line.len()
            );
        } else {
            debug!("<- {line}");
        }
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(TERMINATOR.as_bytes())?;
        self.writer.flush()?;
        let mut reply = String::new();
        if self.reader.read_line(&mut reply)? == 0 {
            return Err(ClientError::Network("connection closed by instrument".into()));
        }
        let reply = reply.trim_end_matches(['\r', '\n']).to_string();
        trace!("-> {} bytes", reply.len());
        Ok(reply)
    }

    /// Sends one line; `ERR:` replies become [`ClientError::Instrument`].
    pub fn request(&mut self, line: &str) -> Result<String, ClientError> {
        let reply = self.exchange(line)?;
        if let Some((code, message)) = ScpiResponse::error_parts(&reply) {
            return Err(ClientError::Instrument { command: header_of(line), code, message: message.to_string() });
        }
        if reply.starts_with("ERR:") {
            return Err(ClientError::Instrument { command: header_of(line), code: 0, message: reply });
        }
        Ok(reply)
    }

    /// Set-command expecting an `OK` acknowledgement.
    pub fn set(&mut self, line: &str) -> Result<(), ClientError> {
        let reply = self.request(line)?;
        if reply == "OK" {
            Ok(())
        } else {
            Err(ClientError::Protocol(format!("{}: expected OK, got {reply:?}", header_of(line))))
        }
    }

    pub fn query(&mut self, line: &str) -> Result<String, ClientError> {
        self.request(line)
    }

    pub fn identify(&mut self) -> Result<String, ClientError> {
        self.query("*IDN?")
    }

    pub fn upload_waveform(&mut self, samples: &[f64]) -> Result<(), ClientError> {
        if samples.len() > BUFFER_SAMPLES {
            return Err(ClientError::Config(format!(
                "{} samples exceed the {BUFFER_SAMPLES}-sample buffer",
                samples.len()
            )));
        }
        let payload = serialize_f64_array(samples);
        let body = payload.trim_start_matches('{').trim_end_matches('}');
        self.set(&format!("SOUR1:TRAC:DATA:DATA {body}"))
    }

    /// Polls `ACQ:TRIG:STAT?` until `TD` or the timeout elapses.
    pub fn wait_triggered(&mut self) -> Result<(), ClientError> {
        let deadline = Instant::now() + self.timeout;
        loop {
            if self.query("ACQ:TRIG:STAT?")? == "TD" {
                return Ok(());
            }
            if Instant::now() >= deadline {
                return Err(ClientError::Network("acquisition did not complete before the timeout".into()));
            }
            thread::sleep(Duration::from_millis(10));
        }
    }

    /// Reads the full buffer of acquisition channel `ch` (1 or 2).
    pub fn read_channel(&mut self, ch: u8) -> Result<Vec<f64>, ClientError> {
        let reply = self.query(&format!("ACQ:SOUR{ch}:DATA?"))?;
        parse_buffer_values(&reply).map_err(|e| ClientError::Protocol(format!("ACQ:SOUR{ch}:DATA? reply: {e}")))
    }
}

fn header_of(line: &str) -> String {
    line.split_whitespace().next().unwrap_or("").to_string()
}
