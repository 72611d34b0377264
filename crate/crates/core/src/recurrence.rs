//! Recurrence harmonics: front indices whose objective vector reappears in
//! consecutive generations drive the amplitudes of harmonic partials.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::front::GenerationFront;

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_INCREMENT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecurrenceError {
    #[error("generation {current} does not directly follow generation {previous}")]
    NonConsecutive { previous: u64, current: u64 },
    #[error("recurrent index {index} has no partial (bank holds {partials})")]
    IndexOutOfRange { index: usize, partials: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub generation_index: u64,
    pub recurrent_indices: BTreeSet<usize>,
    pub epsilon: f64,
}

impl RecurrenceReport {
    pub fn empty(generation_index: u64) -> Self {
        Self {
            generation_index,
            recurrent_indices: BTreeSet::new(),
            epsilon: 0.0,
        }
    }
}

/// Marks every index of `cur` whose point lies within `epsilon` (per
/// component) of some point of `prev`.
pub fn detect_recurrence(
    prev: &GenerationFront,
    cur: &GenerationFront,
    epsilon: f64,
) -> Result<RecurrenceReport, RecurrenceError> {
    if prev.generation_index.checked_add(1) != Some(cur.generation_index) {
        return Err(RecurrenceError::NonConsecutive {
            previous: prev.generation_index,
            current: cur.generation_index,
        });
    }
    let prev_pts = prev.points();
    let recurrent_indices = cur
        .points()
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            // prev is sorted by f1: only scan a slightly widened window
            // around c.0 so rounding in the bounds cannot hide a match
            let margin = 2.0 * epsilon + 4.0 * f64::EPSILON * c.0.abs().max(1.0);
            let lo = prev_pts.partition_point(|q| q.0 < c.0 - margin);
            prev_pts[lo..]
                .iter()
                .take_while(|q| q.0 <= c.0 + margin)
                .any(|q| (c.0 - q.0).abs() <= epsilon && (c.1 - q.1).abs() <= epsilon)
        })
        .map(|(i, _)| i)
        .collect();
    Ok(RecurrenceReport {
        generation_index: cur.generation_index,
        recurrent_indices,
        epsilon,
    })
}

fn mix_seed(seed: u64, generation: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ generation.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keeps a uniformly drawn `round(keep_fraction * |indices|)` subset. The
/// draw depends only on `rng_seed`, the generation index and the input set.
pub fn throttle_recurrence(
    report: &RecurrenceReport,
    keep_fraction: f64,
    rng_seed: u64,
) -> RecurrenceReport {
    let total = report.recurrent_indices.len();
    let keep = ((keep_fraction.clamp(0.0, 1.0) * total as f64).round() as usize).min(total);
    if keep == total {
        return report.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(rng_seed, report.generation_index));
    let recurrent_indices = report
        .recurrent_indices
        .iter()
        .copied()
        .choose_multiple(&mut rng, keep)
        .into_iter()
        .collect();
    RecurrenceReport {
        recurrent_indices,
        ..report.clone()
    }
}

/// Consecutive-recurrence counters and the amplitudes derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialBank {
    counters: Vec<u32>,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    pub fundamental_hz: f64,
    pub increment: f64,
}

impl PartialBank {
    pub fn new(max_partials: usize, fundamental_hz: f64, increment: f64) -> Self {
        Self {
            counters: vec![0; max_partials],
            amplitudes: vec![0.0; max_partials],
            phases: vec![0.0; max_partials],
            fundamental_hz,
            increment,
        }
    }

    pub fn max_partials(&self) -> usize {
        self.counters.len()
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Partials currently sounding.
    pub fn active_count(&self) -> usize {
        self.amplitudes.iter().filter(|&&a| a > 0.0).count()
    }

    pub fn is_silent(&self) -> bool {
        self.amplitudes.iter().all(|&a| a == 0.0)
    }

    /// Recurrent partials step up by one; every other counter resets.
    pub fn update(&mut self, report: &RecurrenceReport) -> Result<(), RecurrenceError> {
        let p = self.counters.len();
        if let Some(&index) = report.recurrent_indices.iter().find(|&&i| i >= p) {
            return Err(RecurrenceError::IndexOutOfRange { index, partials: p });
        }
        for (k, counter) in self.counters.iter_mut().enumerate() {
            if report.recurrent_indices.contains(&k) {
                *counter = counter.saturating_add(1);
            } else {
                *counter = 0;
            }
        }
        self.recompute_amplitudes();
        Ok(())
    }

    /// Clears all counters, as after a generation with no recurrence.
    pub fn reset(&mut self) {
        self.counters.fill(0);
        self.recompute_amplitudes();
    }

    pub fn set_increment(&mut self, increment: f64) {
        self.increment = increment;
        self.recompute_amplitudes();
    }

    fn recompute_amplitudes(&mut self) {
        for (a, &c) in self.amplitudes.iter_mut().zip(&self.counters) {
            *a = (c as f64 * self.increment).min(1.0);
        }
    }

    /// Sums the harmonic partials into `out`, scaled by `master_gain`.
    ///
    /// Partial `k` sounds at `(k + 1) * fundamental_hz`; any partial at or
    /// above Nyquist is muted. Phases run free across calls whether or not
    /// a partial is audible.
    pub fn render(&mut self, sample_rate_hz: f64, master_gain: f64, out: &mut [f64]) {
        out.fill(0.0);
        let nyquist = sample_rate_hz / 2.0;
        let n = out.len() as f64;
        for (k, (&amp, phase)) in self
            .amplitudes
            .iter()
            .zip(self.phases.iter_mut())
            .enumerate()
        {
            let freq = (k + 1) as f64 * self.fundamental_hz;
            // cycles per sample
            let inc = freq / sample_rate_hz;
            if amp > 0.0 && freq < nyquist {
                let a = master_gain * amp;
                let start = *phase;
                for (j, o) in out.iter_mut().enumerate() {
                    let ph = (start + j as f64 * inc).fract();
                    *o += a * (TAU * ph).sin();
                }
            }
            *phase = (*phase + n * inc).fract();
        }
    }
}
