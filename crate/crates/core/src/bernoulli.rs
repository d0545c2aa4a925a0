//! Factorized Bernoulli distribution over binary connectivity.

use crate::error::{Error, Result};
use crate::rng::{Domain, Stream};

pub const DEFAULT_CLAMP_EPS: f64 = 1e-3;

/// Bernoulli means, one per synapse, kept inside `[eps, 1 - eps]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    probs: Vec<f64>,
    clamp_eps: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("clamp eps must lie in (0, 0.5), got {eps}")))
    }
}

impl ProbVector {
    /// Validates that every component lies in `[eps, 1 - eps]`.
    pub fn new(probs: Vec<f64>, clamp_eps: f64) -> Result<Self> {
        check_eps(clamp_eps)?;
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= clamp_eps && value <= 1.0 - clamp_eps) {
                return Err(Error::InvalidProbability {
                    index,
                    value,
                    eps: clamp_eps,
                });
            }
        }
        Ok(Self { probs, clamp_eps })
    }

    pub fn uniform(d: usize, p: f64, clamp_eps: f64) -> Result<Self> {
        Self::new(vec![p; d], clamp_eps)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn eps(&self) -> f64 {
        self.clamp_eps
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Thresholds at 0.5: the most likely single connectivity.
    pub fn mode(&self) -> Vec<u8> {
        self.probs.iter().map(|&p| u8::from(p >= 0.5)).collect()
    }
}

/// Identifies the random stream a sample was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTag {
    pub run_seed: u64,
    pub domain: Domain,
    pub generation: u64,
    pub member: u64,
}

impl SeedTag {
    pub fn train(run_seed: u64, generation: u64, member: u64) -> Self {
        Self {
            run_seed,
            domain: Domain::Connectivity,
            generation,
            member,
        }
    }

    /// Evaluation episodes draw from their own domain so they never touch
    /// the training streams.
    pub fn eval(run_seed: u64, episode: u64) -> Self {
        Self {
            run_seed,
            domain: Domain::Eval,
            generation: 0,
            member: episode,
        }
    }

    pub fn stream(&self) -> Stream {
        Stream::new(self.run_seed)
            .domain(self.domain)
            .derive(self.generation)
            .derive(self.member)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivitySample {
    pub bits: Vec<u8>,
    pub seed_tag: SeedTag,
}

impl ConnectivitySample {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b != 0).count()
    }
}

/// Draws bit `i` as `uniform(seed_tag, i) < rho_i`.
pub fn sample(rho: &ProbVector, seed_tag: SeedTag) -> ConnectivitySample {
    let stream = seed_tag.stream();
    let bits = rho
        .probs
        .iter()
        .enumerate()
        .map(|(i, &p)| u8::from(stream.uniform_at(i as u64) < p))
        .collect();
    ConnectivitySample { bits, seed_tag }
}

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// `(theta_i - rho_i) / (rho_i (1 - rho_i))`.
pub fn score(rho: &ProbVector, theta: &ConnectivitySample) -> Result<Vec<f64>> {
    check_dims(rho.len(), theta.len())?;
    Ok(rho
        .probs
        .iter()
        .zip(&theta.bits)
        .map(|(&p, &b)| (f64::from(b) - p) / (p * (1.0 - p)))
        .collect())
}

/// Diagonal of the Fisher information, `1 / (rho_i (1 - rho_i))`.
pub fn fisher_diag(rho: &ProbVector) -> Vec<f64> {
    rho.probs.iter().map(|&p| 1.0 / (p * (1.0 - p))).collect()
}

fn kl_bernoulli(p: f64, q: f64) -> f64 {
    p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()
}

/// `KL(p_rho || p_rho2)` in nats, summed over independent coordinates.
pub fn kl_exact(rho: &ProbVector, rho2: &ProbVector) -> Result<f64> {
    check_dims(rho.len(), rho2.len())?;
    Ok(rho
        .probs
        .iter()
        .zip(&rho2.probs)
        .map(|(&p, &q)| kl_bernoulli(p, q))
        .sum())
}

/// Second-order model `0.5 * sum_i delta_i^2 / (rho_i (1 - rho_i))`.
pub fn kl_quadratic(rho: &ProbVector, delta: &[f64]) -> Result<f64> {
    check_dims(rho.len(), delta.len())?;
    Ok(0.5
        * rho
            .probs
            .iter()
            .zip(delta)
            .map(|(&p, &d)| d * d / (p * (1.0 - p)))
            .sum::<f64>())
}

/// Projects each component onto `[eps, 1 - eps]`.
pub fn clamp(rho_raw: &[f64], eps: f64) -> Result<ProbVector> {
    check_eps(eps)?;
    let mut probs = Vec::with_capacity(rho_raw.len());
    for (index, &value) in rho_raw.iter().enumerate() {
        if value.is_nan() {
            return Err(Error::InvalidProbability { index, value, eps });
        }
        probs.push(value.clamp(eps, 1.0 - eps));
    }
    Ok(ProbVector {
        probs,
        clamp_eps: eps,
    })
}
