//! The render context that owns both sonification paths, plus offline
//! rendering, analysis exports and the live block supplier built on it.

mod analysis;
mod live;
mod params;
mod render;
mod runlog;
mod wav;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::front::{self, FrontError, GenerationFront, RawFront};
use crate::recurrence::{self, PartialBank, RecurrenceError, RecurrenceReport};
use crate::shape::{self, ShapeError, Wavetable};

pub use analysis::{rms, spectral_flatness, spectrogram_export, Spectrogram};
pub use live::{BlockSupplier, EngineMessage, EngineQueue, LiveEngine, SharedState, StateFrame};
pub use params::{EngineParams, LiveParam};
pub use render::{render_run, GenerationSnapshot, RenderOutput, SnapshotFile};
pub use runlog::{LogEvent, RunEventLog, RunHeader};
pub use wav::{encode_wav, write_wav, WavFormat};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("blocks differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("audio of {len} samples is shorter than the {window}-sample window")]
    AudioTooShort { len: usize, window: usize },
    #[error("window must be a power of two and hop in 1..=window (window {window}, hop {hop})")]
    InvalidWindow { window: usize, hop: usize },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{0}` cannot change during a run")]
    NotLiveTunable(String),
    #[error("value {value} out of range for `{name}`")]
    InvalidValue { name: String, value: f64 },
    #[error("invalid engine parameters: {0}")]
    InvalidParams(String),
    #[error("malformed run log: {0}")]
    MalformedLog(String),
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Wav(#[from] hound::Error),
}

/// `clamp(gain1 * a + gain2 * b, -1, 1)` sample by sample.
pub fn mix(a: &[f64], b: &[f64], gain1: f64, gain2: f64) -> Result<Vec<f64>, EngineError> {
    let mut out = vec![0.0; a.len()];
    mix_into(a, b, gain1, gain2, &mut out)?;
    Ok(out)
}

pub fn mix_into(
    a: &[f64],
    b: &[f64],
    gain1: f64,
    gain2: f64,
    out: &mut [f64],
) -> Result<(), EngineError> {
    if a.len() != b.len() {
        return Err(EngineError::LengthMismatch(a.len(), b.len()));
    }
    if out.len() != a.len() {
        return Err(EngineError::LengthMismatch(a.len(), out.len()));
    }
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = (gain1 * x + gain2 * y).clamp(-1.0, 1.0);
    }
    Ok(())
}

/// What the most recent ingest did to the recurrence path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub generation_index: u64,
    pub points: usize,
    pub recurrent: usize,
    /// Recurrent indices past the last partial; they cannot sound.
    pub unassigned: usize,
}

/// Single-owner DSP state for both paths.
#[derive(Debug, Clone)]
pub struct Engine {
    params: EngineParams,
    wavetable: Wavetable,
    partials: PartialBank,
    previous: Option<GenerationFront>,
    distances: Vec<f64>,
    scratch1: Vec<f64>,
    scratch2: Vec<f64>,
}

impl Engine {
    pub fn new(params: EngineParams) -> Result<Self, EngineError> {
        params.validate()?;
        Ok(Self {
            wavetable: Wavetable::new(
                params.buffer_size_p1,
                params.sample_value_scaling,
                params.oscillator_hz,
            ),
            partials: PartialBank::new(
                params.num_partials,
                params.fundamental_hz,
                params.amplitude_increment,
            ),
            params,
            previous: None,
            distances: Vec::new(),
            scratch1: Vec::new(),
            scratch2: Vec::new(),
        })
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    pub fn wavetable(&self) -> &Wavetable {
        &self.wavetable
    }

    pub fn wavetable_mut(&mut self) -> &mut Wavetable {
        &mut self.wavetable
    }

    pub fn partials(&self) -> &PartialBank {
        &self.partials
    }

    pub fn current_generation(&self) -> Option<u64> {
        self.previous.as_ref().map(|f| f.generation_index)
    }

    /// Changes a live-tunable parameter by name.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), EngineError> {
        let param: LiveParam = name.parse()?;
        self.set_live(param, value)
    }

    pub fn set_live(&mut self, param: LiveParam, value: f64) -> Result<(), EngineError> {
        self.params.set(param, value)?;
        self.wavetable.frequency_hz = self.params.oscillator_hz;
        self.partials.fundamental_hz = self.params.fundamental_hz;
        if param == LiveParam::SampleValueScaling {
            // rescale the sounding cycle right away, not at the next front
            self.wavetable.scale = self.params.sample_value_scaling;
            if !self.distances.is_empty() {
                self.wavetable.write(&self.distances)?;
            }
        }
        Ok(())
    }

    /// Runs one generation's front through both paths.
    ///
    /// The wavetable is rewritten from chord distances. The partial bank
    /// steps on recurrence against the previous front, or resets when there
    /// is no directly preceding generation.
    pub fn ingest(&mut self, raw: RawFront) -> Result<IngestSummary, EngineError> {
        let raw = front::validate_raw(raw)?;
        let filtered = RawFront {
            points: front::nondominated_filter(&raw.points),
            ..raw
        };
        let cur = front::normalize(&filtered);
        let chord = shape::chord_of(&cur);
        let distances = shape::chord_distances(&cur, &chord);
        self.wavetable.write(&distances)?;
        self.distances = distances;

        let mut report = match &self.previous {
            Some(prev) => {
                match recurrence::detect_recurrence(prev, &cur, self.params.recurrence_epsilon) {
                    Ok(r) => r,
                    Err(RecurrenceError::NonConsecutive { previous, current }) => {
                        log::info!(
                            "generation {current} does not follow {previous}; recurrence reset"
                        );
                        RecurrenceReport::empty(cur.generation_index)
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            None => RecurrenceReport::empty(cur.generation_index),
        };
        if self.params.recurrence_keep < 1.0 {
            report = recurrence::throttle_recurrence(
                &report,
                self.params.recurrence_keep,
                self.params.throttle_seed,
            );
        }
        let recurrent = report.recurrent_indices.len();
        let limit = self.partials.max_partials();
        let before = report.recurrent_indices.len();
        report.recurrent_indices.retain(|&i| i < limit);
        let unassigned = before - report.recurrent_indices.len();
        if unassigned > 0 {
            log::debug!("{unassigned} recurrent indices exceed the {limit} partials");
        }
        self.partials.update(&report)?;

        let summary = IngestSummary {
            generation_index: cur.generation_index,
            points: cur.count(),
            recurrent,
            unassigned,
        };
        self.previous = Some(cur);
        Ok(summary)
    }

    /// Renders both paths without gain into separate blocks.
    pub fn render_paths(&mut self, p1: &mut [f64], p2: &mut [f64]) {
        let sr = self.params.sample_rate_hz;
        self.wavetable.render(sr, p1);
        self.partials.render(sr, 1.0, p2);
    }

    /// Renders the mixed output; the per-path blocks stay available through
    /// [`Engine::last_paths`].
    pub fn render_block(&mut self, out: &mut [f64]) {
        let n = out.len();
        let mut s1 = std::mem::take(&mut self.scratch1);
        let mut s2 = std::mem::take(&mut self.scratch2);
        s1.resize(n, 0.0);
        s2.resize(n, 0.0);
        self.render_paths(&mut s1, &mut s2);
        mix_into(&s1, &s2, self.params.gain_p1, self.params.gain_p2, out)
            .expect("scratch blocks sized to output");
        self.scratch1 = s1;
        self.scratch2 = s2;
    }

    /// Ungained path blocks from the last [`Engine::render_block`] call.
    pub fn last_paths(&self) -> (&[f64], &[f64]) {
        (&self.scratch1, &self.scratch2)
    }
}
