//! WebSocket control surface for a live engine.
//!
//! Clients send `{"set":{"param":"gain_p1","value":0.2}}`. The server
//! broadcasts state frames at most 20 times per second:
//!
//! ```json
//! {"generation_index":12,"buffer":[...],"partials":[...],"params":{...},"rms":{"p1":0.1,"p2":0.0}}
//! ```
//!
//! `buffer` holds the readable wavetable and is present only in the first
//! frame a client receives and in frames where the generation changed.
//! Rejected messages get `{"error":"unknown_param" | "not_live_tunable" |
//! "invalid_value" | "malformed","message":...}` and the connection stays open.

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tungstenite::{Message, WebSocket};

use crate::engine::{EngineError, EngineParams, EngineQueue, LiveParam, SharedState, StateFrame};

/// Minimum spacing between broadcast frames.
pub const FRAME_INTERVAL: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRequest {
    pub param: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inbound {
    pub set: SetRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPair {
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub generation_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffer: Option<Vec<f64>>,
    pub partials: Vec<f64>,
    pub params: EngineParams,
    pub rms: RmsPair,
}

impl StateMessage {
    pub fn from_frame(frame: &StateFrame, with_buffer: bool) -> Self {
        Self {
            generation_index: frame.generation_index,
            buffer: with_buffer.then(|| frame.buffer.clone()),
            partials: frame.partials.clone(),
            params: frame.params.clone(),
            rms: RmsPair {
                p1: frame.rms.p1,
                p2: frame.rms.p2,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorMessage {
    pub error: String,
    pub message: String,
}

impl ErrorMessage {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        Self {
            error: kind.to_owned(),
            message: message.into(),
        }
    }
}

/// Checks a set request against the live-tunable set and value ranges.
pub fn validate_set(params: &EngineParams, req: &SetRequest) -> Result<LiveParam, ErrorMessage> {
    let param: LiveParam = req.param.parse().map_err(|e: EngineError| match e {
        EngineError::NotLiveTunable(_) => ErrorMessage::new("not_live_tunable", e.to_string()),
        _ => ErrorMessage::new("unknown_param", e.to_string()),
    })?;
    params
        .clone()
        .set(param, req.value)
        .map_err(|e| ErrorMessage::new("invalid_value", e.to_string()))?;
    Ok(param)
}

type WsResult = Result<(), Box<tungstenite::Error>>;

type ParamHook = Arc<dyn Fn(LiveParam, f64) + Send + Sync>;

struct Shared {
    queue: Arc<EngineQueue>,
    state: Arc<SharedState>,
    on_param: ParamHook,
    clients: Mutex<Vec<Sender<Arc<str>>>>,
    stop: AtomicBool,
}

impl Shared {
    /// Params as they will be once queued changes are applied.
    fn pending_params(&self, overlay: &Mutex<Option<EngineParams>>) -> EngineParams {
        let live = self.state.latest().params.clone();
        overlay.lock().ok().and_then(|o| o.clone()).unwrap_or(live)
    }
}

pub struct ControlServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    threads: Vec<JoinHandle<()>>,
}

impl ControlServer {
    /// Starts accepting clients. `on_param` sees every accepted change,
    /// after it has been queued for the engine.
    pub fn spawn<A, F>(
        addr: A,
        queue: Arc<EngineQueue>,
        state: Arc<SharedState>,
        on_param: F,
    ) -> io::Result<Self>
    where
        A: ToSocketAddrs,
        F: Fn(LiveParam, f64) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let shared = Arc::new(Shared {
            queue,
            state,
            on_param: Arc::new(on_param),
            clients: Mutex::new(Vec::new()),
            stop: AtomicBool::new(false),
        });
        let accept = {
            let shared = shared.clone();
            std::thread::Builder::new()
                .name("control-accept".into())
                .spawn(move || accept_loop(listener, shared))?
        };
        let broadcast = {
            let shared = shared.clone();
            std::thread::Builder::new()
                .name("control-broadcast".into())
                .spawn(move || broadcast_loop(shared))?
        };
        Ok(Self {
            addr,
            shared,
            threads: vec![accept, broadcast],
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn client_count(&self) -> usize {
        self.shared.clients.lock().map(|c| c.len()).unwrap_or(0)
    }

    pub fn shutdown(mut self) {
        self.stop_threads();
    }

    fn stop_threads(&mut self) {
        self.shared.stop.store(true, Ordering::Relaxed);
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ControlServer {
    fn drop(&mut self) {
        self.stop_threads();
    }
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    let overlay: Arc<Mutex<Option<EngineParams>>> = Arc::new(Mutex::new(None));
    while !shared.stop.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, peer)) => {
                let shared = shared.clone();
                let overlay = overlay.clone();
                let spawned = std::thread::Builder::new()
                    .name(format!("control-{peer}"))
                    .spawn(move || {
                        if let Err(e) = serve_client(stream, &shared, &overlay) {
                            log::debug!("control client {peer} closed: {e}");
                        }
                    });
                if let Err(e) = spawned {
                    log::error!("cannot serve control client: {e}");
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => {
                log::error!("control accept failed: {e}");
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    }
}

fn broadcast_loop(shared: Arc<Shared>) {
    let mut last_block = None;
    let mut last_generation = None;
    let mut next = Instant::now();
    while !shared.stop.load(Ordering::Relaxed) {
        let now = Instant::now();
        if now < next {
            std::thread::sleep((next - now).min(Duration::from_millis(10)));
            continue;
        }
        next = now + FRAME_INTERVAL;
        let frame = shared.state.latest();
        if last_block == Some(frame.block) {
            continue;
        }
        last_block = Some(frame.block);
        let changed = last_generation != Some(frame.generation_index);
        last_generation = Some(frame.generation_index);
        let Ok(text) = serde_json::to_string(&StateMessage::from_frame(&frame, changed)) else {
            continue;
        };
        let text: Arc<str> = text.into();
        if let Ok(mut clients) = shared.clients.lock() {
            clients.retain(|c| c.send(text.clone()).is_ok());
        }
    }
}

fn serve_client(
    stream: TcpStream,
    shared: &Shared,
    overlay: &Mutex<Option<EngineParams>>,
) -> WsResult {
    stream
        .set_nonblocking(false)
        .map_err(tungstenite::Error::Io)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => {
            tungstenite::Error::Io(io::ErrorKind::WouldBlock.into())
        }
    })?;
    ws.get_mut()
        .set_read_timeout(Some(Duration::from_millis(10)))
        .map_err(tungstenite::Error::Io)?;
    let (tx, rx): (Sender<Arc<str>>, Receiver<Arc<str>>) = mpsc::channel();
    let first = StateMessage::from_frame(&shared.state.latest(), true);
    send_json(&mut ws, &first)?;
    if let Ok(mut clients) = shared.clients.lock() {
        clients.push(tx);
    }
    while !shared.stop.load(Ordering::Relaxed) {
        match ws.read() {
            Ok(Message::Text(text)) => handle_text(&mut ws, &text, shared, overlay)?,
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                ) => {}
            Err(e) => return Err(Box::new(e)),
        }
        for text in rx.try_iter() {
            ws.send(Message::Text(text.to_string()))?;
        }
    }
    let _ = ws.close(None);
    let _ = ws.flush();
    Ok(())
}

fn handle_text(
    ws: &mut WebSocket<TcpStream>,
    text: &str,
    shared: &Shared,
    overlay: &Mutex<Option<EngineParams>>,
) -> WsResult {
    let req = match serde_json::from_str::<Inbound>(text) {
        Ok(r) => r.set,
        Err(e) => return send_json(ws, &ErrorMessage::new("malformed", e.to_string())),
    };
    let mut params = shared.pending_params(overlay);
    match validate_set(&params, &req) {
        Ok(param) => {
            let _ = params.set(param, req.value);
            if let Ok(mut o) = overlay.lock() {
                *o = Some(params);
            }
            shared.queue.push_param(param.name(), req.value);
            (shared.on_param)(param, req.value);
            Ok(())
        }
        Err(err) => send_json(ws, &err),
    }
}

fn send_json<T: Serialize>(ws: &mut WebSocket<TcpStream>, msg: &T) -> WsResult {
    let text = serde_json::to_string(msg)
        .map_err(|e| tungstenite::Error::Io(io::Error::new(io::ErrorKind::InvalidData, e)))?;
    Ok(ws.send(Message::Text(text))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(param: &str, value: f64) -> SetRequest {
        SetRequest {
            param: param.into(),
            value,
        }
    }

    #[test]
    fn set_validation_classes() {
        let p = EngineParams::default();
        assert_eq!(
            validate_set(&p, &req("gain_p1", 0.0)),
            Ok(LiveParam::GainP1)
        );
        assert_eq!(
            validate_set(&p, &req("volume", 1.0)).unwrap_err().error,
            "unknown_param"
        );
        assert_eq!(
            validate_set(&p, &req("buffer_size_p1", 512.0))
                .unwrap_err()
                .error,
            "not_live_tunable"
        );
        assert_eq!(
            validate_set(&p, &req("gain_p2", 2.0)).unwrap_err().error,
            "invalid_value"
        );
        assert_eq!(
            validate_set(&p, &req("oscillator_hz", 30_000.0))
                .unwrap_err()
                .error,
            "invalid_value"
        );
    }

    #[test]
    fn inbound_schema() {
        let m: Inbound =
            serde_json::from_str(r#"{"set":{"param":"gain_p2","value":0.075}}"#).unwrap();
        assert_eq!(m.set, req("gain_p2", 0.075));
    }

    #[test]
    fn buffer_field_is_optional() {
        let frame = StateFrame::default();
        let v = serde_json::to_value(StateMessage::from_frame(&frame, false)).unwrap();
        assert!(v.get("buffer").is_none());
        for key in ["generation_index", "partials", "params", "rms"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let v = serde_json::to_value(StateMessage::from_frame(&frame, true)).unwrap();
        assert!(v["buffer"].is_array());
    }
}
