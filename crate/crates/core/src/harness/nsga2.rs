//! NSGA-II: binary tournament on (rank, crowding), SBX, polynomial
//! mutation and elitist (mu + lambda) survival.

use std::cmp::Ordering;

use rand::Rng;

use super::{
    constrained_dominates, emitted_front, random_individual, HarnessError, Individual,
    PolynomialMutation, Population, Problem, RngStreams, Sbx,
};
use crate::front::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nsga2Config {
    pub population_size: usize,
    pub crossover: Sbx,
    pub mutation: PolynomialMutation,
    /// Attempts at producing an offspring not already present before a
    /// duplicate is accepted anyway.
    pub duplicate_retries: usize,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            population_size: 100,
            crossover: Sbx::new(0.9, 15.0),
            mutation: PolynomialMutation::new(20.0),
            duplicate_retries: 100,
        }
    }
}

/// Fronts as index lists, best first, under constraint domination.
pub fn fast_non_dominated_sort(individuals: &[Individual]) -> Vec<Vec<usize>> {
    let n = individuals.len();
    let mut dominated_by = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if constrained_dominates(&individuals[i], &individuals[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if constrained_dominates(&individuals[j], &individuals[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance within one front. Extreme points get `f64::INFINITY`.
pub fn crowding_distance(points: &[Point]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n];
    if n <= 2 {
        d.iter_mut().for_each(|v| *v = f64::INFINITY);
        return d;
    }
    let objectives: [fn(&Point) -> f64; 2] = [|p| p.0, |p| p.1];
    for obj in objectives {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| obj(&points[a]).total_cmp(&obj(&points[b])).then(a.cmp(&b)));
        let lo = obj(&points[idx[0]]);
        let hi = obj(&points[idx[n - 1]]);
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let gap = obj(&points[idx[k + 1]]) - obj(&points[idx[k - 1]]);
            d[idx[k]] += gap / span;
        }
    }
    d
}

fn rank_and_crowding(individuals: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; individuals.len()];
    let mut crowd = vec![0.0; individuals.len()];
    for (r, front) in fast_non_dominated_sort(individuals).iter().enumerate() {
        let pts: Vec<Point> = front.iter().map(|&i| individuals[i].f).collect();
        for (&i, c) in front.iter().zip(crowding_distance(&pts)) {
            rank[i] = r;
            crowd[i] = c;
        }
    }
    (rank, crowd)
}

fn tournament(rank: &[usize], crowd: &[f64], rng: &mut impl Rng) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    match rank[a].cmp(&rank[b]) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => match crowd[a].total_cmp(&crowd[b]) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => {
                if rng.gen::<bool>() {
                    a
                } else {
                    b
                }
            }
        },
    }
}

/// Elitist survival: whole fronts first, then the least crowded of the
/// front that does not fit.
fn survive(mut union: Vec<Individual>, size: usize) -> Vec<Individual> {
    let mut keep = Vec::with_capacity(size);
    for front in fast_non_dominated_sort(&union) {
        if keep.len() + front.len() <= size {
            keep.extend(front);
            continue;
        }
        let pts: Vec<Point> = front.iter().map(|&i| union[i].f).collect();
        let cd = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]).then(a.cmp(&b)));
        keep.extend(order.iter().take(size - keep.len()).map(|&k| front[k]));
        break;
    }
    keep.sort_unstable();
    let mut taken: Vec<Option<Individual>> = union.drain(..).map(Some).collect();
    keep.iter().map(|&i| taken[i].take().unwrap()).collect()
}

/// One NSGA-II generation over `pop`, which must hold at least two
/// individuals.
pub fn nsga2_generation(
    pop: &Population,
    problem: &Problem,
    config: &Nsga2Config,
    rng: &mut RngStreams,
) -> Result<Population, HarnessError> {
    let parents = &pop.individuals;
    let size = parents.len();
    let (rank, crowd) = rank_and_crowding(parents);
    let mut offspring: Vec<Individual> = Vec::with_capacity(size);
    let mut retries = 0;
    while offspring.len() < size {
        let a = tournament(&rank, &crowd, &mut rng.selection);
        let b = tournament(&rank, &crowd, &mut rng.selection);
        let (mut c1, mut c2) = config.crossover.cross(
            &parents[a].x,
            &parents[b].x,
            &problem.lower,
            &problem.upper,
            &mut rng.crossover,
        );
        for child in [&mut c1, &mut c2] {
            config
                .mutation
                .mutate(child, &problem.lower, &problem.upper, &mut rng.mutation);
        }
        for child in [c1, c2] {
            if offspring.len() == size {
                break;
            }
            let seen = parents.iter().chain(&offspring).any(|p| p.x == child);
            if seen && retries < config.duplicate_retries {
                retries += 1;
                continue;
            }
            offspring.push(Individual::evaluate(problem, child)?);
        }
    }
    let mut union = parents.clone();
    union.extend(offspring);
    Ok(Population {
        individuals: survive(union, size),
        generation_index: pop.generation_index + 1,
    })
}

#[derive(Debug, Clone)]
pub struct Nsga2 {
    problem: Problem,
    config: Nsga2Config,
    rng: RngStreams,
    population: Population,
}

impl Nsga2 {
    /// Evaluates a uniformly random initial population (generation 0).
    pub fn new(problem: Problem, config: Nsga2Config, seed: u64) -> Result<Self, HarnessError> {
        let mut rng = RngStreams::new(seed);
        let individuals = (0..config.population_size)
            .map(|_| random_individual(&problem, &mut rng.init))
            .collect::<Result<_, _>>()?;
        let population = Population {
            individuals,
            generation_index: 0,
        };
        Ok(Self {
            problem,
            config,
            rng,
            population,
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn step(&mut self) -> Result<(), HarnessError> {
        self.population =
            nsga2_generation(&self.population, &self.problem, &self.config, &mut self.rng)?;
        Ok(())
    }

    /// Rank-0 objective vectors of the current population.
    pub fn front(&self) -> Vec<Point> {
        emitted_front(&self.population.individuals)
    }
}
