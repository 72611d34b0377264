//! Loopback tests for the OSC ingest server, the control WebSocket and
//! `sonopt listen`.

use std::net::{TcpStream, UdpSocket};
use std::process::{Command, Stdio};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::Value;
use tungstenite::{Message, WebSocket};

use sonopt::control::ControlServer;
use sonopt::engine::{Engine, EngineParams, EngineQueue, LiveEngine, LiveParam, SharedState};
use sonopt::front::RawFront;
use sonopt::harness::{run_algorithm, Algorithm, OscSink, Problem, ProblemKind};
use sonopt::osc::{encode_front, encode_param, OscFrontMessage, OscParamMessage, OscServer};

fn wait_for(mut cond: impl FnMut() -> bool) -> bool {
    let deadline = Instant::now() + Duration::from_secs(5);
    while Instant::now() < deadline {
        if cond() {
            return true;
        }
        std::thread::sleep(Duration::from_millis(5));
    }
    false
}

fn front(g: i32, n: usize) -> OscFrontMessage {
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            (x, (1.0 - x).powi(2))
        })
        .collect();
    OscFrontMessage::from_points(g, &pts)
}

#[test]
fn osc_server_feeds_engine() {
    let queue = EngineQueue::new(16);
    let seen = Arc::new(Mutex::new(Vec::new()));
    let server = {
        let seen = seen.clone();
        OscServer::spawn("127.0.0.1:0", queue.clone(), move |f: &RawFront| {
            seen.lock().unwrap().push(f.generation_index)
        })
        .unwrap()
    };
    let sock = UdpSocket::bind("127.0.0.1:0").unwrap();
    let to = server.local_addr();
    for g in [0, 1, 1, 0, 2] {
        sock.send_to(&encode_front(&front(g, 50)), to).unwrap();
    }
    sock.send_to(b"garbage", to).unwrap();
    let p = OscParamMessage {
        param: LiveParam::GainP1,
        value: 0.5,
    };
    sock.send_to(&encode_param(&p), to).unwrap();
    assert!(wait_for(|| server
        .stats()
        .params
        .load(std::sync::atomic::Ordering::Relaxed)
        == 1));
    assert_eq!(*seen.lock().unwrap(), vec![0, 1, 2]);
    let stats = server.stats();
    assert_eq!(stats.late.load(std::sync::atomic::Ordering::Relaxed), 2);
    assert_eq!(stats.rejected.load(std::sync::atomic::Ordering::Relaxed), 1);

    let state = SharedState::new();
    let mut live = LiveEngine::new(
        Engine::new(EngineParams::default()).unwrap(),
        queue,
        state.clone(),
    );
    let mut block = vec![0.0; 512];
    live.next_block(&mut block);
    let frame = state.latest();
    assert_eq!(frame.generation_index, Some(2));
    assert_eq!(frame.buffer.len(), 100);
    assert_eq!(frame.params.gain_p1, 0.5);
    assert!(frame.partials.iter().filter(|&&a| a > 0.0).count() >= 50);
    server.shutdown();
}

#[test]
fn harness_over_osc_matches_in_process() {
    let queue = EngineQueue::new(512);
    let server = OscServer::spawn("127.0.0.1:0", queue.clone(), |_: &RawFront| {}).unwrap();
    let mut sink = OscSink::new(server.local_addr()).unwrap();
    let log = run_algorithm(
        &Problem::new(ProblemKind::Zdt1),
        Algorithm::Nsga2,
        20,
        4,
        &mut sink,
    )
    .unwrap();
    assert!(wait_for(|| queue.len() == 20));
    let drained = queue.try_drain().unwrap();
    for (msg, f) in drained.iter().zip(log.fronts()) {
        match msg {
            sonopt::engine::EngineMessage::Front(r) => {
                assert_eq!(r.generation_index, f.generation_index);
                for (a, b) in r.points.iter().zip(&f.points) {
                    assert_eq!(a.0, b.0 as f32 as f64);
                    assert_eq!(a.1, b.1 as f32 as f64);
                }
            }
            other => panic!("{other:?}"),
        }
    }
}

fn connect(
    addr: std::net::SocketAddr,
) -> WebSocket<tungstenite::stream::MaybeTlsStream<TcpStream>> {
    let (ws, _) = tungstenite::connect(format!("ws://{addr}")).unwrap();
    ws
}

fn next_json(ws: &mut WebSocket<tungstenite::stream::MaybeTlsStream<TcpStream>>) -> Value {
    loop {
        if let Message::Text(t) = ws.read().unwrap() {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

fn set(
    ws: &mut WebSocket<tungstenite::stream::MaybeTlsStream<TcpStream>>,
    param: &str,
    value: f64,
) {
    let msg = serde_json::json!({"set": {"param": param, "value": value}});
    ws.send(Message::Text(msg.to_string())).unwrap();
}

/// Renders blocks on a background thread, like an audio callback would.
fn spawn_renderer(
    mut live: LiveEngine,
    stop: Arc<std::sync::atomic::AtomicBool>,
) -> std::thread::JoinHandle<()> {
    std::thread::spawn(move || {
        let mut block = vec![0.0; 480];
        while !stop.load(std::sync::atomic::Ordering::Relaxed) {
            live.next_block(&mut block);
            std::thread::sleep(Duration::from_millis(10));
        }
    })
}

#[test]
fn control_endpoint_round_trip() {
    let queue = EngineQueue::new(16);
    let state = SharedState::new();
    let changes = Arc::new(Mutex::new(Vec::new()));
    let server = {
        let changes = changes.clone();
        ControlServer::spawn("127.0.0.1:0", queue.clone(), state.clone(), move |p, v| {
            changes.lock().unwrap().push((p, v))
        })
        .unwrap()
    };
    let live = LiveEngine::new(
        Engine::new(EngineParams::default()).unwrap(),
        queue.clone(),
        state,
    );
    let stop = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let renderer = spawn_renderer(live, stop.clone());

    queue.push_front(front(0, 90).to_raw("t"));
    let mut a = connect(server.local_addr());
    let mut b = connect(server.local_addr());
    let first = next_json(&mut a);
    for key in ["generation_index", "buffer", "partials", "params", "rms"] {
        assert!(first.get(key).is_some(), "{key} missing in {first}");
    }
    assert!(wait_for(|| server.client_count() == 2));

    set(&mut a, "gain_p1", 0.0);
    let started = Instant::now();
    let mut confirmed = false;
    while started.elapsed() < Duration::from_secs(2) {
        let f = next_json(&mut a);
        if f["params"]["gain_p1"] == 0.0 {
            confirmed = true;
            break;
        }
    }
    assert!(confirmed);
    assert!(
        started.elapsed() < Duration::from_millis(250),
        "{:?}",
        started.elapsed()
    );
    assert_eq!(*changes.lock().unwrap(), vec![(LiveParam::GainP1, 0.0)]);

    set(&mut a, "volume", 1.0);
    set(&mut a, "buffer_size_p1", 512.0);
    set(&mut a, "gain_p2", 7.0);
    a.send(Message::Text("{not json".into())).unwrap();
    let mut errors = Vec::new();
    while errors.len() < 4 {
        let f = next_json(&mut a);
        if let Some(e) = f.get("error") {
            errors.push(e.as_str().unwrap().to_owned());
        }
    }
    assert_eq!(
        errors,
        [
            "unknown_param",
            "not_live_tunable",
            "invalid_value",
            "malformed"
        ]
    );

    queue.push_front(front(1, 70).to_raw("t"));
    let with_buffer = |ws: &mut WebSocket<_>| loop {
        let f = next_json(ws);
        if f["generation_index"] == 1 && f.get("buffer").is_some() {
            return f;
        }
    };
    let fa = with_buffer(&mut a);
    let fb = with_buffer(&mut b);
    assert_eq!(fa, fb);
    assert_eq!(fa["buffer"].as_array().unwrap().len(), 140);

    stop.store(true, std::sync::atomic::Ordering::Relaxed);
    renderer.join().unwrap();
    server.shutdown();
}

#[test]
fn listen_mode_records_incoming_fronts() {
    let dir = tempfile::tempdir().unwrap();
    let port = {
        let s = UdpSocket::bind("127.0.0.1:0").unwrap();
        s.local_addr().unwrap().port()
    };
    let child = Command::new(env!("CARGO_BIN_EXE_sonopt"))
        .args([
            "listen",
            "--port",
            &port.to_string(),
            "--max-gens",
            "3",
            "--idle-timeout",
            "5",
            "--spg",
            "0.05",
            "--out",
            "l.wav",
            "--log-out",
            "l.jsonl",
        ])
        .current_dir(dir.path())
        .env("RUST_LOG", "warn")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    std::thread::sleep(Duration::from_millis(300));
    let sock = UdpSocket::bind("127.0.0.1:0").unwrap();
    for g in 0..3 {
        sock.send_to(&encode_front(&front(g, 40)), ("127.0.0.1", port))
            .unwrap();
        std::thread::sleep(Duration::from_millis(60));
    }
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let log = sonopt::engine::RunEventLog::load(dir.path().join("l.jsonl")).unwrap();
    assert_eq!(
        log.fronts().map(|f| f.generation_index).collect::<Vec<_>>(),
        [0, 1, 2]
    );
    let wav = hound::WavReader::open(dir.path().join("l.wav")).unwrap();
    assert!(wav.len() >= 2400);
    let peak = wav
        .into_samples::<i16>()
        .map(|s| s.unwrap().unsigned_abs())
        .max()
        .unwrap();
    assert!(peak > 0);
}
