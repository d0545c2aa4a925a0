//! Episodic tasks behind a common reset/step interface.
//!
//! All environments are deterministic functions of the reset seed and the
//! action sequence. Returns are undiscounted sums of per-step rewards.

mod pattern;
mod pointmass;
mod pole;

pub use pattern::PatternMatch;
pub use pointmass::PointMass;
pub use pole::PoleBalance;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Domain, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

pub trait Environment: Send {
    fn obs_dim(&self) -> usize;
    fn act_dim(&self) -> usize;
    fn horizon(&self) -> usize;
    /// Largest absolute reward a single step can produce.
    fn reward_bound(&self) -> f64;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    /// Errors with [`Error::EpisodeDone`] once the episode has ended.
    fn step(&mut self, action: &[f64]) -> Result<Step>;
}

/// Static description of an episode family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeSpec {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    PatternMatch,
    Pointmass,
    PoleBalance,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PatternMatch => "pattern_match",
            Self::Pointmass => "pointmass",
            Self::PoleBalance => "pole_balance",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pattern_match" => Ok(Self::PatternMatch),
            "pointmass" | "pointmass_reach" => Ok(Self::Pointmass),
            "pole_balance" => Ok(Self::PoleBalance),
            other => Err(Error::Config(format!("unknown environment `{other}`"))),
        }
    }
}

/// Everything needed to build an environment instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub kind: EnvKind,
    pub horizon: usize,
    pub pattern_d: usize,
    pub pattern_target_seed: u64,
}

impl EnvConfig {
    pub fn pattern_target(&self) -> Vec<u8> {
        let s = Stream::new(self.pattern_target_seed).domain(Domain::Target);
        (0..self.pattern_d).map(|i| (s.at(i as u64) & 1) as u8).collect()
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        Ok(match self.kind {
            EnvKind::PatternMatch => Box::new(PatternMatch::new(self.pattern_target())),
            EnvKind::Pointmass => Box::new(PointMass::new(self.horizon)),
            EnvKind::PoleBalance => Box::new(PoleBalance::new(self.horizon)),
        })
    }

    pub fn episode_spec(&self, seed: u64) -> Result<EpisodeSpec> {
        let env = self.build()?;
        Ok(EpisodeSpec {
            obs_dim: env.obs_dim(),
            act_dim: env.act_dim(),
            horizon: env.horizon(),
            seed,
        })
    }
}

pub fn pattern_match_env(target: Vec<u8>) -> PatternMatch {
    PatternMatch::new(target)
}

pub fn pointmass_reach_env(horizon: usize) -> PointMass {
    PointMass::new(horizon)
}

pub fn pole_balance_env(horizon: usize) -> PoleBalance {
    PoleBalance::new(horizon)
}

/// Runs `policy` until the episode ends and returns the undiscounted sum.
pub fn rollout(
    env: &mut dyn Environment,
    seed: u64,
    mut policy: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<f64> {
    let mut obs = env.reset(seed);
    let mut total = 0.0;
    loop {
        let action = policy(&obs)?;
        let step = env.step(&action)?;
        total += step.reward;
        if step.done {
            return Ok(total);
        }
        obs = step.obs;
    }
}

pub(crate) fn clip_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}
