use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{analysis::rms, Engine, EngineError, EngineParams, LogEvent, RunEventLog, RunHeader};
use crate::front::RawFront;

/// Per-generation state captured right after the generation's audio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSnapshot {
    pub generation_index: u64,
    pub points: usize,
    pub readable_len: usize,
    /// The readable region of the path-1 buffer.
    pub buffer: Vec<f64>,
    pub partials: Vec<f64>,
    pub recurrent: usize,
    pub active_partials: usize,
    pub rms_p1: f64,
    pub rms_p2: f64,
}

/// Snapshot file contents: header plus one entry per generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFile {
    pub header: RunHeader,
    pub frames_per_generation: usize,
    pub generations: Vec<GenerationSnapshot>,
}

impl SnapshotFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EngineError> {
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<Vec<u8>, EngineError> {
        Ok(serde_json::to_vec(self)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    /// Final mixed, clamped output.
    pub audio: Vec<f64>,
    /// Ungained path tracks, present when requested.
    pub path1: Option<Vec<f64>>,
    pub path2: Option<Vec<f64>>,
    pub snapshots: SnapshotFile,
}

impl RenderOutput {
    /// Audio of generation `i` (by position, not index) inside `track`.
    pub fn generation_slice<'a>(&self, track: &'a [f64], i: usize) -> &'a [f64] {
        let n = self.snapshots.frames_per_generation;
        &track[i * n..(i + 1) * n]
    }
}

/// Renders a whole run offline.
///
/// Every front produces `seconds_per_generation` of audio. Parameter events
/// are applied in log order, so they take effect before the audio of their
/// generation. Rendering is single-threaded and bit-for-bit deterministic.
pub fn render_run(
    log: &RunEventLog,
    params: &EngineParams,
    keep_tracks: bool,
) -> Result<RenderOutput, EngineError> {
    log.check_order()?;
    let mut engine = Engine::new(params.clone())?;
    let frames = params.frames_per_generation();
    let gens = log
        .events
        .iter()
        .filter(|e| matches!(e, LogEvent::Front { .. }))
        .count();

    let mut audio = Vec::with_capacity(frames * gens);
    let mut path1 = keep_tracks.then(|| Vec::with_capacity(frames * gens));
    let mut path2 = keep_tracks.then(|| Vec::with_capacity(frames * gens));
    let mut snapshots = Vec::with_capacity(gens);
    let mut block = vec![0.0; frames];

    for ev in &log.events {
        match ev {
            LogEvent::Param { name, value, .. } => engine.set_param(name, *value)?,
            LogEvent::Front {
                generation_index,
                source_id,
                points,
            } => {
                let summary = engine.ingest(RawFront {
                    generation_index: *generation_index,
                    points: points.clone(),
                    source_id: source_id.clone(),
                })?;
                engine.render_block(&mut block);
                audio.extend_from_slice(&block);
                let (b1, b2) = engine.last_paths();
                if let Some(p) = path1.as_mut() {
                    p.extend_from_slice(b1);
                }
                if let Some(p) = path2.as_mut() {
                    p.extend_from_slice(b2);
                }
                let (r1, r2) = (rms(b1), rms(b2));
                snapshots.push(GenerationSnapshot {
                    generation_index: *generation_index,
                    points: summary.points,
                    readable_len: engine.wavetable().readable_len(),
                    buffer: engine.wavetable().readable().to_vec(),
                    partials: engine.partials().amplitudes().to_vec(),
                    recurrent: summary.recurrent,
                    active_partials: engine.partials().active_count(),
                    rms_p1: r1,
                    rms_p2: r2,
                });
            }
        }
    }

    Ok(RenderOutput {
        audio,
        path1,
        path2,
        snapshots: SnapshotFile {
            header: RunHeader {
                params: params.clone(),
                ..log.header.clone()
            },
            frames_per_generation: frames,
            generations: snapshots,
        },
    })
}
