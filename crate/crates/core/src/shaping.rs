//! Centered-rank return shaping and the population natural-gradient
//! estimator.

use crate::bernoulli::{ConnectivitySample, ProbVector};
use crate::error::{Error, Result};

/// Maps returns to `(rank - 1) / (N - 1) - 1/2`, ranks starting at 1.
/// Tied returns share the mean of the rank positions they occupy.
pub fn centered_rank(raw: &[f64]) -> Result<Vec<f64>> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::PopulationTooSmall(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable, so equal returns stay in input order; NaN sorts last
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));

    let denom = (n - 1) as f64;
    let mut shaped = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && raw[order[end]] == raw[order[start]] {
            end += 1;
        }
        // zero-based positions start..end, mean rank - 1 = (start + end - 1) / 2
        let rank0 = (start + end - 1) as f64 / 2.0;
        let value = rank0 / denom - 0.5;
        for &idx in &order[start..end] {
            shaped[idx] = value;
        }
        start = end;
    }
    Ok(shaped)
}

/// Population estimate `g` together with its signal energy `||g||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalGradient {
    pub g: Vec<f64>,
    pub energy: f64,
    pub pop_size: usize,
}

impl NaturalGradient {
    pub fn from_vec(g: Vec<f64>, pop_size: usize) -> Self {
        let energy = g.iter().map(|x| x * x).sum();
        Self { g, energy, pop_size }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

/// Streaming form of the estimator: members are folded in one at a time,
/// always in member order, so the result does not depend on how rollouts
/// were scheduled.
#[derive(Debug, Clone)]
pub struct GradientAccumulator<'a> {
    rho: &'a ProbVector,
    acc: Vec<f64>,
    count: usize,
}

impl<'a> GradientAccumulator<'a> {
    pub fn new(rho: &'a ProbVector) -> Self {
        Self {
            rho,
            acc: vec![0.0; rho.len()],
            count: 0,
        }
    }

    pub fn add(&mut self, bits: &[u8], weight: f64) -> Result<()> {
        if bits.len() != self.acc.len() {
            return Err(Error::DimensionMismatch {
                expected: self.acc.len(),
                actual: bits.len(),
            });
        }
        for ((a, &b), &p) in self.acc.iter_mut().zip(bits).zip(self.rho.probs()) {
            *a += weight * (f64::from(b) - p);
        }
        self.count += 1;
        Ok(())
    }

    pub fn finish(self) -> NaturalGradient {
        let n = self.count.max(1) as f64;
        let g = self.acc.into_iter().map(|a| a / n).collect();
        NaturalGradient::from_vec(g, self.count)
    }
}

/// `g_i = (1/N) sum_n w_n (theta^(n)_i - rho_i)`.
///
/// `weights` is normally the output of [`centered_rank`]; the oracle tests
/// pass raw returns through the same path.
pub fn natural_gradient_estimate(
    samples: &[ConnectivitySample],
    weights: &[f64],
    rho: &ProbVector,
) -> Result<NaturalGradient> {
    if samples.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            actual: weights.len(),
        });
    }
    let mut acc = GradientAccumulator::new(rho);
    for (s, &w) in samples.iter().zip(weights) {
        acc.add(&s.bits, w)?;
    }
    Ok(acc.finish())
}

/// Fixed-order pairwise summation; the tree shape depends only on the length.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
