//! Live operation: producers (OSC server, harness, control endpoint) push
//! messages onto a bounded queue; the audio callback pulls blocks from a
//! [`LiveEngine`], which drains the queue only at block boundaries.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{analysis::rms, Engine, EngineParams};
use crate::front::RawFront;

#[derive(Debug, Clone, PartialEq)]
pub enum EngineMessage {
    Front(RawFront),
    Param { name: String, value: f64 },
}

/// Bounded multi-producer queue feeding one render context.
///
/// When full, the oldest pending front is discarded so the newest state
/// wins. Parameter messages are never dropped.
#[derive(Debug)]
pub struct EngineQueue {
    inner: Mutex<VecDeque<EngineMessage>>,
    front_capacity: usize,
    dropped_fronts: AtomicU64,
}

impl EngineQueue {
    pub fn new(front_capacity: usize) -> Arc<Self> {
        Arc::new(Self {
            inner: Mutex::new(VecDeque::new()),
            front_capacity: front_capacity.max(1),
            dropped_fronts: AtomicU64::new(0),
        })
    }

    pub fn push(&self, msg: EngineMessage) {
        let mut q = self.inner.lock().unwrap_or_else(|e| e.into_inner());
        if matches!(msg, EngineMessage::Front(_)) {
            let fronts = q
                .iter()
                .filter(|m| matches!(m, EngineMessage::Front(_)))
                .count();
            if fronts >= self.front_capacity {
                if let Some(pos) = q.iter().position(|m| matches!(m, EngineMessage::Front(_))) {
                    q.remove(pos);
                    self.dropped_fronts.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        q.push_back(msg);
    }

    pub fn push_front(&self, front: RawFront) {
        self.push(EngineMessage::Front(front));
    }

    pub fn push_param(&self, name: impl Into<String>, value: f64) {
        self.push(EngineMessage::Param {
            name: name.into(),
            value,
        });
    }

    /// Takes every pending message without waiting. Returns `None` when a
    /// producer currently holds the lock; the caller retries next block.
    pub fn try_drain(&self) -> Option<Vec<EngineMessage>> {
        let mut q = match self.inner.try_lock() {
            Ok(q) => q,
            Err(std::sync::TryLockError::Poisoned(e)) => e.into_inner(),
            Err(std::sync::TryLockError::WouldBlock) => return None,
        };
        Some(q.drain(..).collect())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().map(|q| q.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dropped_fronts(&self) -> u64 {
        self.dropped_fronts.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PathRms {
    pub p1: f64,
    pub p2: f64,
}

/// Engine state published for monitoring clients.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub generation_index: Option<u64>,
    pub buffer: Vec<f64>,
    pub partials: Vec<f64>,
    pub params: EngineParams,
    pub rms: PathRms,
    /// Blocks rendered so far.
    pub block: u64,
}

/// Latest-value cell between the render context and readers. The
/// publisher never waits: a contended publish is skipped.
#[derive(Debug, Default)]
pub struct SharedState {
    frame: Mutex<Arc<StateFrame>>,
    errors: Mutex<Vec<String>>,
}

impl SharedState {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn latest(&self) -> Arc<StateFrame> {
        self.frame
            .lock()
            .map(|f| Arc::clone(&f))
            .unwrap_or_default()
    }

    fn try_publish(&self, frame: StateFrame) -> bool {
        match self.frame.try_lock() {
            Ok(mut slot) => {
                *slot = Arc::new(frame);
                true
            }
            Err(_) => false,
        }
    }

    fn report_error(&self, msg: String) {
        if let Ok(mut e) = self.errors.try_lock() {
            e.push(msg);
        }
    }

    /// Ingest errors seen by the render context since the last call.
    pub fn take_errors(&self) -> Vec<String> {
        self.errors
            .lock()
            .map(|mut e| std::mem::take(&mut *e))
            .unwrap_or_default()
    }
}

/// Pull-based source of audio blocks for an output backend.
pub trait BlockSupplier: Send {
    fn sample_rate_hz(&self) -> f64;
    fn fill(&mut self, out: &mut [f32]);
}

/// Render context for live use. Shares its DSP path with offline rendering.
pub struct LiveEngine {
    engine: Engine,
    queue: Arc<EngineQueue>,
    state: Arc<SharedState>,
    block: Vec<f64>,
    blocks: u64,
}

impl LiveEngine {
    pub fn new(engine: Engine, queue: Arc<EngineQueue>, state: Arc<SharedState>) -> Self {
        Self {
            engine,
            queue,
            state,
            block: Vec::new(),
            blocks: 0,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    fn apply_pending(&mut self) {
        let Some(msgs) = self.queue.try_drain() else {
            return;
        };
        for msg in msgs {
            let res = match msg {
                EngineMessage::Front(f) => {
                    let g = f.generation_index;
                    self.engine
                        .ingest(f)
                        .map(|_| ())
                        .map_err(|e| format!("front {g}: {e}"))
                }
                EngineMessage::Param { name, value } => self
                    .engine
                    .set_param(&name, value)
                    .map_err(|e| format!("param {name}: {e}")),
            };
            if let Err(e) = res {
                log::warn!("{e}");
                self.state.report_error(e);
            }
        }
    }

    /// Applies queued messages, then renders one block of mixed output.
    pub fn next_block(&mut self, out: &mut [f64]) {
        self.apply_pending();
        self.engine.render_block(out);
        self.blocks += 1;
        let (b1, b2) = self.engine.last_paths();
        let frame = StateFrame {
            generation_index: self.engine.current_generation(),
            buffer: self.engine.wavetable().readable().to_vec(),
            partials: self.engine.partials().amplitudes().to_vec(),
            params: self.engine.params().clone(),
            rms: PathRms {
                p1: rms(b1),
                p2: rms(b2),
            },
            block: self.blocks,
        };
        self.state.try_publish(frame);
    }
}

impl BlockSupplier for LiveEngine {
    fn sample_rate_hz(&self) -> f64 {
        self.engine.params().sample_rate_hz
    }

    fn fill(&mut self, out: &mut [f32]) {
        let mut block = std::mem::take(&mut self.block);
        block.resize(out.len(), 0.0);
        self.next_block(&mut block);
        for (o, s) in out.iter_mut().zip(&block) {
            *o = *s as f32;
        }
        self.block = block;
    }
}
