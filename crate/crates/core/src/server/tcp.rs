use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{info, warn};

use super::{ErrorCode, ServerConfig, Session};

pub const DEFAULT_PORT: u16 = 5025;

/// Environment variable overriding the listening port.
pub const PORT_ENV: &str = "RADAR_KIT_PORT";

/// Longest accepted request line, terminator excluded. A full 16384-sample
/// upload needs well under half of this.
pub const MAX_LINE_BYTES: usize = 1 << 20;

/// How long a newcomer waits for a closing session before being refused.
const BUSY_GRACE: Duration = Duration::from_millis(500);

/// Port from [`PORT_ENV`], if set and valid.
pub fn port_from_env() -> Option<u16> {
    std::env::var(PORT_ENV).ok()?.trim().parse().ok()
}

/// TCP front of the emulator. Each accepted connection gets a fresh
/// [`Session`]; while one is open, further clients receive an
/// `ERR:110` busy line and are disconnected.
pub struct InstrumentServer {
    listener: TcpListener,
    config: ServerConfig,
}

impl InstrumentServer {
    pub fn bind(addr: impl ToSocketAddrs, config: ServerConfig) -> io::Result<Self> {
        Ok(Self { listener: TcpListener::bind(addr)?, config })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until the process exits.
    pub fn run(self) -> io::Result<()> {
        self.accept_loop(&AtomicBool::new(false))
    }

    /// Serves on a background thread.
    pub fn spawn(self) -> io::Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let thread = thread::Builder::new().name("radar-kit-accept".into()).spawn(move || {
            if let Err(e) = self.accept_loop(&flag) {
                warn!("accept loop ended: {e}");
            }
        })?;
        Ok(ServerHandle { addr, stop, thread: Some(thread) })
    }

    fn accept_loop(&self, stop: &AtomicBool) -> io::Result<()> {
        info!("listening on {}", self.listener.local_addr()?);
        let active = Arc::new(AtomicBool::new(false));
        for stream in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let peer = stream.peer_addr().map_or_else(|_| "?".to_string(), |a| a.to_string());
            if !claim(&active) {
                info!("refusing {peer}: busy");
                refuse(stream);
                continue;
            }
            info!("session opened by {peer}");
            let session = Session::new(self.config.clone());
            let active = Arc::clone(&active);
            let spawned = thread::Builder::new().name("radar-kit-session".into()).spawn(move || {
                if let Err(e) = serve_connection(stream, session) {
                    warn!("session with {peer} ended: {e}");
                } else {
                    info!("session with {peer} closed");
                }
                active.store(false, Ordering::SeqCst);
            });
            if let Err(e) = spawned {
                warn!("cannot start session thread: {e}");
            }
        }
        Ok(())
    }
}

/// Takes the single session slot, allowing a just-closed session a moment to
/// release it.
fn claim(active: &AtomicBool) -> bool {
    let deadline = Instant::now() + BUSY_GRACE;
    loop {
        if active.compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst).is_ok() {
            return true;
        }
        if Instant::now() >= deadline {
            return false;
        }
        thread::sleep(Duration::from_millis(5));
    }
}

fn refuse(mut stream: TcpStream) {
    let line = ErrorCode::Busy.response("instrument busy: another session is active").to_wire();
    let _ = stream.write_all(line.as_bytes());
    let _ = stream.shutdown(std::net::Shutdown::Both);
}

enum Frame {
    Line(Vec<u8>),
    TooLong,
    Eof,
}

fn read_frame<R: BufRead>(reader: &mut R, line: &mut Vec<u8>) -> io::Result<Frame> {
    line.clear();
    let mut overflow = false;
    loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            return Ok(if overflow {
                Frame::TooLong
            } else if line.is_empty() {
                Frame::Eof
            } else {
                Frame::Line(std::mem::take(line))
            });
        }
        let (chunk, done) = match buf.iter().position(|b| *b == b'\n') {
            Some(i) => (&buf[..i], i + 1),
            None => (buf, buf.len()),
        };
        let found_newline = done > chunk.len();
        if line.len() + chunk.len() > MAX_LINE_BYTES + 1 {
            overflow = true;
            line.clear();
        } else if !overflow {
            line.extend_from_slice(chunk);
        }
        reader.consume(done);
        if found_newline {
            if overflow {
                return Ok(Frame::TooLong);
            }
            if line.last() == Some(&b'\r') {
                line.pop();
            }
            if line.len() > MAX_LINE_BYTES {
                return Ok(Frame::TooLong);
            }
            return Ok(Frame::Line(std::mem::take(line)));
        }
    }
}

/// Runs one session over a connected stream until the peer disconnects.
pub(crate) fn serve_connection(stream: TcpStream, mut session: Session) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let mut line = Vec::new();
    loop {
        let reply = match read_frame(&mut reader, &mut line)? {
            Frame::Eof => return Ok(()),
            Frame::TooLong => ErrorCode::LineTooLong.response(&format!("request line exceeds {MAX_LINE_BYTES} bytes")),
            Frame::Line(l) => session.handle_line(&l),
        };
        writer.write_all(reply.to_wire().as_bytes())?;
        writer.flush()?;
    }
}

/// Background server started by [`InstrumentServer::spawn`]; stops on drop.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    /// Stops accepting connections. An open session runs to completion.
    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        if let Some(t) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect_timeout(&self.addr, Duration::from_secs(1));
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_accepting();
    }
}
