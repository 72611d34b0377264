//! Per-generation approximation sets: validation, dominance filtering,
//! min-max scaling and canonical ordering.
//!
//! Every function here is pure. The output of [`normalize`] is the
//! [`GenerationFront`] that both sonification paths consume.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 2-D objective vector, both objectives minimized.
pub type Point = (f64, f64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontError {
    #[error("front has no points")]
    EmptyFront,
    #[error("non-finite objective value at point index {0}")]
    NonFiniteValue(usize),
}

/// One generation's objective matrix as emitted by an optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawFront {
    pub generation_index: u64,
    pub points: Vec<Point>,
    #[serde(default)]
    pub source_id: String,
}

impl RawFront {
    pub fn new(generation_index: u64, points: Vec<Point>) -> Self {
        Self {
            generation_index,
            points,
            source_id: String::new(),
        }
    }

    pub fn with_source(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }
}

/// A normalized front sorted ascending by the first objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationFront {
    pub generation_index: u64,
    points: Vec<Point>,
}

impl GenerationFront {
    /// Builds a front from already-normalized points, sorting them into
    /// canonical order. Values are not rescaled.
    pub fn from_normalized(generation_index: u64, mut points: Vec<Point>) -> Self {
        sort_canonical(&mut points);
        Self {
            generation_index,
            points,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Checks that the front is non-empty and every coordinate is finite.
pub fn validate_raw(front: RawFront) -> Result<RawFront, FrontError> {
    if front.points.is_empty() {
        return Err(FrontError::EmptyFront);
    }
    if let Some(idx) = front
        .points
        .iter()
        .position(|(a, b)| !a.is_finite() || !b.is_finite())
    {
        return Err(FrontError::NonFiniteValue(idx));
    }
    Ok(front)
}

/// `p` dominates `q` under minimization of both objectives.
#[inline]
pub fn dominates(p: Point, q: Point) -> bool {
    p.0 <= q.0 && p.1 <= q.1 && (p.0 < q.0 || p.1 < q.1)
}

/// Keeps the points no other input point dominates. Survivor order is
/// stable and exact duplicates are all retained.
pub fn nondominated_filter(points: &[Point]) -> Vec<Point> {
    if points.len() < 2 {
        return points.to_vec();
    }
    // Sweep in (f1 asc, f2 asc) order: a point survives iff its f2 does not
    // exceed the best f2 seen among points with strictly smaller f1, and no
    // point with equal f1 has a strictly smaller f2.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .0
            .total_cmp(&points[b].0)
            .then(points[a].1.total_cmp(&points[b].1))
    });

    let mut keep = vec![false; points.len()];
    let mut best_f2 = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        let f1 = points[order[i]].0;
        let mut j = i;
        while j < order.len() && points[order[j]].0 == f1 {
            j += 1;
        }
        // within the group, order[i] carries the minimal f2
        let group_min = points[order[i]].1;
        if group_min < best_f2 {
            for &idx in &order[i..j] {
                if points[idx].1 == group_min {
                    keep[idx] = true;
                }
            }
            best_f2 = group_min;
        }
        i = j;
    }

    points
        .iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect()
}

fn canonical_cmp(a: &Point, b: &Point) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| b.1.total_cmp(&a.1))
}

fn sort_canonical(points: &mut [Point]) {
    points.sort_by(canonical_cmp);
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn rescale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        // exact endpoints even when (hi - lo) rounds
        if v == lo {
            0.0
        } else if v == hi {
            1.0
        } else {
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        }
    } else {
        0.0
    }
}

/// Min-max scales each objective over this generation's points to [0, 1]
/// and sorts the result. A flat objective maps to 0 everywhere.
pub fn normalize(front: &RawFront) -> GenerationFront {
    let (lo1, hi1) = min_max(front.points.iter().map(|p| p.0));
    let (lo2, hi2) = min_max(front.points.iter().map(|p| p.1));
    let mut points: Vec<Point> = front
        .points
        .iter()
        .map(|&(a, b)| (rescale(a, lo1, hi1), rescale(b, lo2, hi2)))
        .collect();
    sort_canonical(&mut points);
    GenerationFront {
        generation_index: front.generation_index,
        points,
    }
}
