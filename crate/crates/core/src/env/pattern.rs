use crate::error::{Error, Result};

use super::{Environment, Step};

/// One-step task scoring a binary vector against a hidden target:
/// return = -Hamming(bits, target). Actions above 0.5 count as ones, so the
/// connectivity itself can be passed as the action.
#[derive(Debug, Clone)]
pub struct PatternMatch {
    target: Vec<u8>,
    done: bool,
}

impl PatternMatch {
    pub fn new(target: Vec<u8>) -> Self {
        Self { target, done: true }
    }

    pub fn target(&self) -> &[u8] {
        &self.target
    }

    pub fn score_bits(&self, bits: &[u8]) -> f64 {
        -(bits
            .iter()
            .zip(&self.target)
            .filter(|(&b, &t)| (b != 0) != (t != 0))
            .count() as f64)
    }

    /// `E[-Hamming]` under independent Bernoulli(`probs`): closed form.
    pub fn expected_return(&self, probs: &[f64]) -> f64 {
        -probs
            .iter()
            .zip(&self.target)
            .map(|(&p, &t)| if t != 0 { 1.0 - p } else { p })
            .sum::<f64>()
    }
}

impl Environment for PatternMatch {
    fn obs_dim(&self) -> usize {
        1
    }

    fn act_dim(&self) -> usize {
        self.target.len()
    }

    fn horizon(&self) -> usize {
        1
    }

    fn reward_bound(&self) -> f64 {
        self.target.len() as f64
    }

    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.done = false;
        vec![0.0]
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action.len() != self.target.len() {
            return Err(Error::DimensionMismatch {
                expected: self.target.len(),
                actual: action.len(),
            });
        }
        let bits: Vec<u8> = action.iter().map(|&a| u8::from(a > 0.5)).collect();
        self.done = true;
        Ok(Step {
            obs: vec![0.0],
            reward: self.score_bits(&bits),
            done: true,
        })
    }
}
