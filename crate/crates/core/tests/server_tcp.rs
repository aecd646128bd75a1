use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radar_kit::client::{run_chirp_sequence, ExperimentConfig, ScpiClient};
use radar_kit::server::{InstrumentServer, ServerConfig, ServerHandle, MAX_LINE_BYTES};
use radar_kit::sim::{FrontEndModel, PointTarget, Scene};

fn serve() -> ServerHandle {
    let scene = Scene::new(vec![PointTarget::new(15.0, -2.0, 0.1)], 1e-3).unwrap();
    let cfg = ServerConfig { front_end: FrontEndModel::ivs947(), scene, seed: 3, emulate_latency: false };
    InstrumentServer::bind("127.0.0.1:0", cfg).unwrap().spawn().unwrap()
}

struct Raw {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Raw {
    fn connect(server: &ServerHandle) -> Self {
        let s = TcpStream::connect(server.addr()).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
        s.set_nodelay(true).unwrap();
        Self { reader: BufReader::new(s.try_clone().unwrap()), writer: s }
    }

    fn send(&mut self, bytes: &[u8]) -> String {
        let mut framed = bytes.to_vec();
        framed.extend_from_slice(b"\r\n");
        self.writer.write_all(&framed).unwrap();
        self.reply()
    }

    fn reply(&mut self) -> String {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        assert!(line.ends_with("\r\n"), "{line:?}");
        line.trim_end().to_string()
    }
}

#[test]
fn second_client_is_refused_while_a_session_is_open() {
    let server = serve();
    let mut first = Raw::connect(&server);
    assert!(first.send(b"*IDN?").starts_with("RADAR-KIT,"));

    let mut second = TcpStream::connect(server.addr()).unwrap();
    second.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    let mut text = String::new();
    second.read_to_string(&mut text).unwrap();
    assert!(text.starts_with("ERR:110,"), "{text:?}");

    // the first session is unaffected
    assert_eq!(first.send(b"ACQ:DEC?"), "1");
    drop(first);

    let mut third = Raw::connect(&server);
    assert!(third.send(b"*IDN?").starts_with("RADAR-KIT,"));
}

#[test]
fn each_line_gets_exactly_one_reply() {
    let server = serve();
    let mut c = Raw::connect(&server);
    c.writer.write_all(b"ACQ:DEC 8\nACQ:DEC?\r\n\r\n*IDN?\n").unwrap();
    assert_eq!(c.reply(), "OK");
    assert_eq!(c.reply(), "8");
    assert!(c.reply().starts_with("ERR:100,"));
    assert!(c.reply().starts_with("RADAR-KIT,"));
}

#[test]
fn overlong_line_is_rejected_and_the_session_survives() {
    let server = serve();
    let mut c = Raw::connect(&server);
    let big = vec![b'1'; MAX_LINE_BYTES + 10];
    assert!(c.send(&big).starts_with("ERR:109,"));
    assert_eq!(c.send(b"ACQ:DEC 64"), "OK");
    assert_eq!(c.send(b"ACQ:DEC?"), "64");
}

#[test]
fn fuzzed_session_then_valid_experiment() {
    let server = serve();
    {
        let mut c = Raw::connect(&server);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let vocabulary: [&[u8]; 12] =
            [b"SOUR1:", b"ACQ:", b"TRIG", b" NOW", b"?", b"{", b"}", b",", b"0.5", b"\"", b"*RST", b"\xff\xfe"];
        for _ in 0..500 {
            let mut line = Vec::new();
            for _ in 0..rng.random_range(0..12) {
                if rng.random_bool(0.7) {
                    line.extend_from_slice(vocabulary[rng.random_range(0..vocabulary.len())]);
                } else {
                    line.push(rng.random_range(0..=255u8));
                }
            }
            line.retain(|b| *b != b'\n');
            let reply = c.send(&line);
            assert!(reply == "OK" || reply.starts_with("ERR:") || !reply.is_empty(), "{line:?} -> {reply:?}");
        }
        // ends mid-upload
        c.writer.write_all(b"SOUR1:TRAC:DATA:DATA 0.1,0.2,").unwrap();
    }

    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        port: server.port(),
        out_dir: tmp.path().to_path_buf(),
        ..ExperimentConfig::chirp_sequence()
    };
    let report = run_chirp_sequence(&cfg).unwrap();
    assert!((report.detections[0].range_m - 15.0).abs() <= report.range_per_bin_m);
}

#[test]
fn session_state_does_not_leak_between_connections() {
    let server = serve();
    {
        let mut c = ScpiClient::connect("127.0.0.1", server.port(), Duration::from_secs(5)).unwrap();
        c.set("ACQ:DEC 8192").unwrap();
        c.set("SIM:SEED 99").unwrap();
    }
    std::thread::sleep(Duration::from_millis(50));
    let mut c = ScpiClient::connect("127.0.0.1", server.port(), Duration::from_secs(5)).unwrap();
    assert_eq!(c.query("ACQ:DEC?").unwrap(), "1");
    assert_eq!(c.query("SIM:SEED?").unwrap(), "3");
}

#[test]
fn full_acquisition_by_hand() {
    let server = serve();
    let mut c = ScpiClient::connect("127.0.0.1", server.port(), Duration::from_secs(5)).unwrap();
    let ramp: Vec<f64> = (0..128).map(|i| 0.7 + 0.3 * i as f64 / 128.0).collect();
    c.set("SOUR1:FUNC ARBITRARY").unwrap();
    c.upload_waveform(&ramp).unwrap();
    c.set("SOUR1:FREQ:FIX 7450.580596923828").unwrap();
    c.set("SOUR1:BURS:STAT CONTINUOUS").unwrap();
    assert!(c.query("ACQ:SOUR1:DATA?").unwrap_err().to_string().contains("ERR:106"));
    c.set("ACQ:DEC 1024").unwrap();
    c.set("ACQ:START").unwrap();
    assert_eq!(c.query("ACQ:TRIG:STAT?").unwrap(), "WAIT");
    c.set("ACQ:TRIG NOW").unwrap();
    c.wait_triggered().unwrap();
    let i = c.read_channel(1).unwrap();
    let q = c.read_channel(2).unwrap();
    assert_eq!((i.len(), q.len()), (16384, 16384));
    assert!(i.iter().chain(&q).all(|v| (-1.0..=1.0).contains(v)));
    assert!(i.iter().any(|v| *v != 0.0));
    let head: Vec<f64> = radar_kit::scpi::parse_buffer_values(&c.query("ACQ:SOUR1:DATA? 10").unwrap()).unwrap();
    assert_eq!(head, i[..10]);
}
