//! MOEA/D with Tchebycheff decomposition over Das-Dennis weights.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{
    emitted_front, random_individual, HarnessError, Individual, PolynomialMutation, Population,
    Problem, RngStreams, Sbx,
};
use crate::front::Point;

/// Added per unit of constraint violation to a subproblem's aggregation.
pub const VIOLATION_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoeadConfig {
    /// Weight partitions; yields `partitions + 1` subproblems.
    pub partitions: usize,
    pub neighbours: usize,
    /// Probability of mating within the neighbourhood rather than the
    /// whole population.
    pub mating_probability: f64,
    pub crossover: Sbx,
    pub mutation: PolynomialMutation,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self {
            partitions: 100,
            neighbours: 15,
            mating_probability: 0.7,
            crossover: Sbx::new(1.0, 20.0),
            mutation: PolynomialMutation::new(20.0),
        }
    }
}

/// Evenly spaced two-objective weights `(k/h, 1 - k/h)`.
pub fn das_dennis(partitions: usize) -> Vec<[f64; 2]> {
    let h = partitions.max(1);
    (0..=h)
        .map(|k| {
            let w = k as f64 / h as f64;
            [w, 1.0 - w]
        })
        .collect()
}

pub fn tchebycheff(weight: [f64; 2], f: Point, ideal: Point) -> f64 {
    (weight[0] * (f.0 - ideal.0).abs()).max(weight[1] * (f.1 - ideal.1).abs())
}

fn neighbourhoods(weights: &[[f64; 2]], t: usize) -> Vec<Vec<usize>> {
    let t = t.clamp(1, weights.len());
    weights
        .iter()
        .map(|w| {
            let mut idx: Vec<usize> = (0..weights.len()).collect();
            let d = |j: usize| (weights[j][0] - w[0]).powi(2) + (weights[j][1] - w[1]).powi(2);
            idx.sort_by(|&a, &b| d(a).total_cmp(&d(b)).then(a.cmp(&b)));
            idx.truncate(t);
            idx
        })
        .collect()
}

fn penalized(weight: [f64; 2], ind: &Individual, ideal: Point) -> f64 {
    tchebycheff(weight, ind.f, ideal) + VIOLATION_PENALTY * ind.violation
}

#[derive(Debug, Clone)]
pub struct Moead {
    problem: Problem,
    config: MoeadConfig,
    weights: Vec<[f64; 2]>,
    neighbours: Vec<Vec<usize>>,
    ideal: Point,
    rng: RngStreams,
    population: Population,
}

impl Moead {
    pub fn new(problem: Problem, config: MoeadConfig, seed: u64) -> Result<Self, HarnessError> {
        let weights = das_dennis(config.partitions);
        let neighbours = neighbourhoods(&weights, config.neighbours);
        let mut rng = RngStreams::new(seed);
        let individuals: Vec<Individual> = (0..weights.len())
            .map(|_| random_individual(&problem, &mut rng.init))
            .collect::<Result<_, _>>()?;
        let ideal = individuals
            .iter()
            .fold((f64::INFINITY, f64::INFINITY), |z, i| {
                (z.0.min(i.f.0), z.1.min(i.f.1))
            });
        Ok(Self {
            problem,
            config,
            weights,
            neighbours,
            ideal,
            rng,
            population: Population {
                individuals,
                generation_index: 0,
            },
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn weights(&self) -> &[[f64; 2]] {
        &self.weights
    }

    pub fn neighbours(&self) -> &[Vec<usize>] {
        &self.neighbours
    }

    /// Componentwise minimum over every evaluated point so far.
    pub fn ideal(&self) -> Point {
        self.ideal
    }

    /// One pass over all subproblems in random order.
    pub fn step(&mut self) -> Result<(), HarnessError> {
        let n = self.weights.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng.selection);
        let all: Vec<usize> = (0..n).collect();
        for i in order {
            let pool = if self.rng.selection.gen::<f64>() < self.config.mating_probability {
                &self.neighbours[i]
            } else {
                &all
            };
            let mut parents = pool.choose_multiple(&mut self.rng.selection, 2);
            let a = *parents.next().unwrap_or(&i);
            let b = *parents.next().unwrap_or(&a);
            let pop = &self.population.individuals;
            let (c1, c2) = self.config.crossover.cross(
                &pop[a].x,
                &pop[b].x,
                &self.problem.lower,
                &self.problem.upper,
                &mut self.rng.crossover,
            );
            let mut child = if self.rng.crossover.gen::<bool>() {
                c1
            } else {
                c2
            };
            self.config.mutation.mutate(
                &mut child,
                &self.problem.lower,
                &self.problem.upper,
                &mut self.rng.mutation,
            );
            let child = Individual::evaluate(&self.problem, child)?;
            self.ideal = (self.ideal.0.min(child.f.0), self.ideal.1.min(child.f.1));
            for &j in pool.iter() {
                let w = self.weights[j];
                let current = &self.population.individuals[j];
                if penalized(w, &child, self.ideal) < penalized(w, current, self.ideal) {
                    self.population.individuals[j] = child.clone();
                }
            }
        }
        self.population.generation_index += 1;
        Ok(())
    }

    /// Non-dominated subset of the current population.
    pub fn front(&self) -> Vec<Point> {
        emitted_front(&self.population.individuals)
    }
}

/// Free-function form of [`Moead::step`].
pub fn moead_generation(state: &mut Moead) -> Result<&Population, HarnessError> {
    state.step()?;
    Ok(state.population())
}
