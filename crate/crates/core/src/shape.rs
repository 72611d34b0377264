//! Shape audification: the front's deviation from the straight line joining
//! its extremes becomes one cycle of a wavetable.

use thiserror::Error;

use crate::front::{GenerationFront, Point};

/// Distances below this are rounding noise on normalized coordinates and
/// are flushed to exactly zero.
pub const COLLINEAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("front of {points} points needs {needed} samples but buffer holds {capacity}")]
    BufferOverflow {
        points: usize,
        needed: usize,
        capacity: usize,
    },
}

/// Line through the minimizer of objective one and the minimizer of
/// objective two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub start: Point,
    pub end: Point,
    pub degenerate: bool,
}

/// Endpoints of the front's chord. `front` must be non-empty.
pub fn chord_of(front: &GenerationFront) -> Chord {
    let pts = front.points();
    let start = pts[0];
    // last minimal-f2 point in canonical order
    let end = pts
        .iter()
        .copied()
        .reduce(|best, p| if p.1 <= best.1 { p } else { best })
        .unwrap_or(start);
    Chord {
        start,
        end,
        degenerate: start == end,
    }
}

/// Perpendicular distance of every front point from the chord line, or the
/// plain Euclidean distance to the single chord point when it degenerates.
pub fn chord_distances(front: &GenerationFront, chord: &Chord) -> Vec<f64> {
    let (x1, y1) = chord.start;
    let (x2, y2) = chord.end;
    let dx = x2 - x1;
    let dy = y2 - y1;
    let len = dx.hypot(dy);
    front
        .points()
        .iter()
        .map(|&(xi, yi)| {
            let d = if chord.degenerate || len == 0.0 {
                (xi - x1).hypot(yi - y1)
            } else {
                (dx * (y1 - yi) - (x1 - xi) * dy).abs() / len
            };
            if d < COLLINEAR_TOLERANCE {
                0.0
            } else {
                d
            }
        })
        .collect()
}

/// Fixed-size sample buffer scanned by a ramp oscillator over its leading
/// readable region only.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavetable {
    buffer: Vec<f64>,
    readable_len: usize,
    phase: f64,
    pub scale: f64,
    pub frequency_hz: f64,
}

impl Wavetable {
    pub fn new(capacity: usize, scale: f64, frequency_hz: f64) -> Self {
        Self {
            buffer: vec![0.0; capacity],
            readable_len: 0,
            phase: 0.0,
            scale,
            frequency_hz,
        }
    }

    pub fn capacity(&self) -> usize {
        self.buffer.len()
    }

    pub fn readable_len(&self) -> usize {
        self.readable_len
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// The whole buffer including stale samples past the readable region.
    pub fn buffer(&self) -> &[f64] {
        &self.buffer
    }

    /// Samples written by the latest generation.
    pub fn readable(&self) -> &[f64] {
        &self.buffer[..self.readable_len]
    }

    /// Mutable access to the raw buffer, e.g. to poison stale samples.
    pub fn buffer_mut(&mut self) -> &mut [f64] {
        &mut self.buffer
    }

    /// Writes `scale * d` for each distance followed by the negated copy.
    /// Samples past `2 * distances.len()` keep whatever they held.
    pub fn write(&mut self, distances: &[f64]) -> Result<(), ShapeError> {
        let n = distances.len();
        let needed = 2 * n;
        if needed > self.buffer.len() {
            return Err(ShapeError::BufferOverflow {
                points: n,
                needed,
                capacity: self.buffer.len(),
            });
        }
        for (i, &d) in distances.iter().enumerate() {
            let s = (self.scale * d).clamp(-1.0, 1.0);
            self.buffer[i] = s;
            self.buffer[n + i] = -s;
        }
        self.readable_len = needed;
        if needed > 0 {
            self.phase %= needed as f64;
        }
        Ok(())
    }

    /// Fills `out` with the linearly interpolated scan of the readable
    /// region. An empty region yields silence and leaves the phase alone.
    pub fn render(&mut self, sample_rate_hz: f64, out: &mut [f64]) {
        let len = self.readable_len;
        if len == 0 {
            out.fill(0.0);
            return;
        }
        let lenf = len as f64;
        let step = self.frequency_hz * lenf / sample_rate_hz;
        let table = &self.buffer[..len];
        let mut phase = self.phase;
        for o in out.iter_mut() {
            let i0 = phase as usize % len;
            let i1 = if i0 + 1 == len { 0 } else { i0 + 1 };
            let frac = phase - phase.floor();
            *o = table[i0] + (table[i1] - table[i0]) * frac;
            phase += step;
            if phase >= lenf {
                phase %= lenf;
            }
        }
        self.phase = phase;
    }
}
