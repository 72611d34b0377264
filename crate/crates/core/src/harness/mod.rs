//! Built-in bi-objective optimizers and test problems that feed the engine
//! one non-dominated front per generation.

mod moead;
mod nsga2;
mod operators;
mod problems;
mod run;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::front::{self, Point};

pub use moead::{das_dennis, moead_generation, tchebycheff, Moead, MoeadConfig, VIOLATION_PENALTY};
pub use nsga2::{crowding_distance, fast_non_dominated_sort, nsga2_generation, Nsga2, Nsga2Config};
pub use operators::{sbx_beta, sbx_pair, PolynomialMutation, Sbx};
pub use problems::{
    eval_kursawe, eval_tanaka, eval_zdt1, eval_zdt4, Evaluation, Problem, ProblemKind,
};
pub use run::{
    igd, run_algorithm, zdt1_reference, Algorithm, FrontSink, JsonlSink, NullSink, OscSink,
    QueueSink,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("variable {index} = {value} lies outside its bounds")]
    OutOfBounds { index: usize, value: f64 },
    #[error("expected {expected} decision variables, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("sink failed: {0}")]
    Sink(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: Point,
    pub violation: f64,
}

impl Individual {
    pub fn evaluate(problem: &Problem, x: Vec<f64>) -> Result<Self, HarnessError> {
        let e = problem.evaluate(&x)?;
        Ok(Self {
            x,
            f: e.objectives,
            violation: e.violation,
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.violation <= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation_index: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Objective vectors of the best non-dominated set: the non-dominated
    /// feasible points, or if none are feasible, the least-violating ones.
    pub fn front(&self) -> Vec<Point> {
        emitted_front(&self.individuals)
    }
}

/// Feasible beats infeasible, lower violation beats higher, and among
/// feasible solutions plain Pareto dominance decides.
pub fn constrained_dominates(a: &Individual, b: &Individual) -> bool {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => front::dominates(a.f, b.f),
    }
}

pub(crate) fn emitted_front(individuals: &[Individual]) -> Vec<Point> {
    let feasible: Vec<Point> = individuals
        .iter()
        .filter(|i| i.is_feasible())
        .map(|i| i.f)
        .collect();
    if !feasible.is_empty() {
        return front::nondominated_filter(&feasible);
    }
    let best = individuals
        .iter()
        .map(|i| i.violation)
        .fold(f64::INFINITY, f64::min);
    let least: Vec<Point> = individuals
        .iter()
        .filter(|i| i.violation == best)
        .map(|i| i.f)
        .collect();
    front::nondominated_filter(&least)
}

/// Independent generator streams per operator, all derived from one seed.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub init: ChaCha8Rng,
    pub selection: ChaCha8Rng,
    pub crossover: ChaCha8Rng,
    pub mutation: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |s: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(s);
            r
        };
        Self {
            init: stream(1),
            selection: stream(2),
            crossover: stream(3),
            mutation: stream(4),
        }
    }
}

pub(crate) fn random_individual(
    problem: &Problem,
    rng: &mut ChaCha8Rng,
) -> Result<Individual, HarnessError> {
    use rand::Rng;
    let x = problem
        .lower
        .iter()
        .zip(&problem.upper)
        .map(|(&lo, &hi)| lo + (hi - lo) * rng.gen::<f64>())
        .collect();
    Individual::evaluate(problem, x)
}
