//! Real-coded variation: simulated binary crossover and polynomial
//! mutation. Children are clamped into the box bounds.

use rand::Rng;

/// SBX spread factor for a uniform draw `u` in `[0, 1)`.
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    }
}

/// One SBX recombination of a single variable for a given draw `u`.
pub fn sbx_pair(p1: f64, p2: f64, u: f64, eta: f64) -> (f64, f64) {
    let beta = sbx_beta(u, eta);
    (
        0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
        0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sbx {
    /// Probability that a pair recombines at all.
    pub probability: f64,
    /// Per-variable recombination probability within a recombining pair.
    pub variable_probability: f64,
    pub eta: f64,
}

impl Sbx {
    pub fn new(probability: f64, eta: f64) -> Self {
        Self {
            probability,
            variable_probability: 0.5,
            eta,
        }
    }

    pub fn cross<R: Rng>(
        &self,
        a: &[f64],
        b: &[f64],
        lower: &[f64],
        upper: &[f64],
        rng: &mut R,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut c1 = a.to_vec();
        let mut c2 = b.to_vec();
        if rng.gen::<f64>() >= self.probability {
            return (c1, c2);
        }
        for i in 0..a.len() {
            if rng.gen::<f64>() >= self.variable_probability || (a[i] - b[i]).abs() <= 1e-14 {
                continue;
            }
            let u: f64 = rng.gen();
            let (mut x, mut y) = sbx_pair(a[i], b[i], u, self.eta);
            if rng.gen::<bool>() {
                std::mem::swap(&mut x, &mut y);
            }
            c1[i] = x.clamp(lower[i], upper[i]);
            c2[i] = y.clamp(lower[i], upper[i]);
        }
        (c1, c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialMutation {
    /// Per-variable probability; `None` means `1 / n`.
    pub probability: Option<f64>,
    pub eta: f64,
}

impl PolynomialMutation {
    pub fn new(eta: f64) -> Self {
        Self {
            probability: None,
            eta,
        }
    }

    pub fn mutate<R: Rng>(&self, x: &mut [f64], lower: &[f64], upper: &[f64], rng: &mut R) {
        let p = self.probability.unwrap_or(1.0 / x.len() as f64);
        let pow = 1.0 / (self.eta + 1.0);
        for i in 0..x.len() {
            if rng.gen::<f64>() >= p {
                continue;
            }
            let (lo, hi) = (lower[i], upper[i]);
            let span = hi - lo;
            if span <= 0.0 {
                continue;
            }
            let d1 = (x[i] - lo) / span;
            let d2 = (hi - x[i]) / span;
            let u: f64 = rng.gen();
            let dq = if u < 0.5 {
                let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(self.eta + 1.0);
                v.powf(pow) - 1.0
            } else {
                let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(self.eta + 1.0);
                1.0 - v.powf(pow)
            };
            x[i] = (x[i] + dq * span).clamp(lo, hi);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn midpoint_draw_reproduces_parents() {
        assert_eq!(sbx_beta(0.5, 15.0), 1.0);
        assert_eq!(sbx_pair(0.2, 0.9, 0.5, 15.0), (0.2, 0.9));
    }

    #[test]
    fn sbx_preserves_mean() {
        for u in [0.01, 0.3, 0.7, 0.99] {
            let (c1, c2) = sbx_pair(0.2, 0.9, u, 15.0);
            assert!(((c1 + c2) - 1.1).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn children_stay_in_bounds(seed: u64, a in prop::collection::vec(-5.0f64..5.0, 10), b in prop::collection::vec(-5.0f64..5.0, 10)) {
            let lo = vec![-5.0; 10];
            let hi = vec![5.0; 10];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut c1, mut c2) = Sbx::new(1.0, 15.0).cross(&a, &b, &lo, &hi, &mut rng);
            let pm = PolynomialMutation { probability: Some(1.0), eta: 20.0 };
            pm.mutate(&mut c1, &lo, &hi, &mut rng);
            pm.mutate(&mut c2, &lo, &hi, &mut rng);
            for v in c1.iter().chain(&c2) {
                prop_assert!((-5.0..=5.0).contains(v));
            }
        }
    }
}
