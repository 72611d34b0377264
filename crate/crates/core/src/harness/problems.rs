//! Bi-objective test problems. All are minimized.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::front::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Zdt1,
    Zdt4,
    Kursawe,
    Tanaka,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Zdt1,
        ProblemKind::Zdt4,
        ProblemKind::Kursawe,
        ProblemKind::Tanaka,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Zdt1 => "zdt1",
            ProblemKind::Zdt4 => "zdt4",
            ProblemKind::Kursawe => "kursawe",
            ProblemKind::Tanaka => "tanaka",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemKind::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| HarnessError::UnknownProblem(s.to_owned()))
    }
}

/// Objective values plus total constraint violation (0 when feasible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objectives: Point,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Problem {
    pub fn new(kind: ProblemKind) -> Self {
        let (lower, upper) = match kind {
            ProblemKind::Zdt1 => (vec![0.0; 30], vec![1.0; 30]),
            ProblemKind::Zdt4 => {
                let mut lo = vec![-5.0; 10];
                let mut hi = vec![5.0; 10];
                lo[0] = 0.0;
                hi[0] = 1.0;
                (lo, hi)
            }
            ProblemKind::Kursawe => (vec![-5.0; 3], vec![5.0; 3]),
            ProblemKind::Tanaka => (vec![0.0; 2], vec![PI; 2]),
        };
        Self { kind, lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_constrained(&self) -> bool {
        self.kind == ProblemKind::Tanaka
    }

    pub fn check_bounds(&self, x: &[f64]) -> Result<(), HarnessError> {
        if x.len() != self.dim() {
            return Err(HarnessError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (i, ((&v, &lo), &hi)) in x.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            if !(lo..=hi).contains(&v) {
                return Err(HarnessError::OutOfBounds { index: i, value: v });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation, HarnessError> {
        self.check_bounds(x)?;
        Ok(match self.kind {
            ProblemKind::Zdt1 => Evaluation {
                objectives: zdt1_unchecked(x),
                violation: 0.0,
            },
            ProblemKind::Zdt4 => Evaluation {
                objectives: zdt4_unchecked(x),
                violation: 0.0,
            },
            ProblemKind::Kursawe => Evaluation {
                objectives: kursawe_unchecked(x),
                violation: 0.0,
            },
            ProblemKind::Tanaka => tanaka_unchecked(x),
        })
    }
}

fn zdt_tail(f1: f64, g: f64) -> f64 {
    g * (1.0 - (f1 / g).sqrt())
}

fn zdt1_unchecked(x: &[f64]) -> Point {
    let n = x.len();
    let f1 = x[0];
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (n - 1) as f64;
    (f1, zdt_tail(f1, g))
}

fn zdt4_unchecked(x: &[f64]) -> Point {
    let n = x.len();
    let f1 = x[0];
    let g = 1.0
        + 10.0 * (n - 1) as f64
        + x[1..]
            .iter()
            .map(|&v| v * v - 10.0 * (4.0 * PI * v).cos())
            .sum::<f64>();
    (f1, zdt_tail(f1, g))
}

fn kursawe_unchecked(x: &[f64]) -> Point {
    let f1 = x
        .windows(2)
        .map(|w| -10.0 * (-0.2 * (w[0] * w[0] + w[1] * w[1]).sqrt()).exp())
        .sum();
    let f2 = x
        .iter()
        .map(|&v| v.abs().powf(0.8) + 5.0 * (v * v * v).sin())
        .sum();
    (f1, f2)
}

fn tanaka_unchecked(x: &[f64]) -> Evaluation {
    let (x1, x2) = (x[0], x[1]);
    // atan2 gives the one-sided limit pi/2 at x2 = 0 for x1 > 0
    let c1 = x1 * x1 + x2 * x2 - 1.0 - 0.1 * (16.0 * x1.atan2(x2)).cos();
    let c2 = (x1 - 0.5).powi(2) + (x2 - 0.5).powi(2);
    Evaluation {
        objectives: (x1, x2),
        violation: (-c1).max(0.0) + (c2 - 0.5).max(0.0),
    }
}

/// ZDT1 on `[0,1]^30`.
pub fn eval_zdt1(x: &[f64]) -> Result<Point, HarnessError> {
    Problem::new(ProblemKind::Zdt1)
        .evaluate(x)
        .map(|e| e.objectives)
}

/// ZDT4 on `[0,1] x [-5,5]^9`.
pub fn eval_zdt4(x: &[f64]) -> Result<Point, HarnessError> {
    Problem::new(ProblemKind::Zdt4)
        .evaluate(x)
        .map(|e| e.objectives)
}

/// Kursawe on `[-5,5]^3`.
pub fn eval_kursawe(x: &[f64]) -> Result<Point, HarnessError> {
    Problem::new(ProblemKind::Kursawe)
        .evaluate(x)
        .map(|e| e.objectives)
}

/// Tanaka on `[0,pi]^2`, returning objectives and constraint violation.
pub fn eval_tanaka(x: &[f64]) -> Result<(Point, f64), HarnessError> {
    Problem::new(ProblemKind::Tanaka)
        .evaluate(x)
        .map(|e| (e.objectives, e.violation))
}
