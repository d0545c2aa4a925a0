use crate::error::{Error, Result};
use crate::rng::Stream;

use super::{clip_unit, Environment, Step};

const DT: f64 = 0.1;
const ACTION_COST: f64 = 0.01;

/// 2-D double integrator that has to reach a goal.
///
/// Observation `(p - goal, v)`, action = acceleration clipped to `[-1, 1]`,
/// reward `-|p - goal| - 0.01 |a|^2` evaluated after the step. A reset seed
/// places the start at the origin and the goal at unit distance in a
/// seed-dependent direction.
#[derive(Debug, Clone)]
pub struct PointMass {
    horizon: usize,
    pos: [f64; 2],
    vel: [f64; 2],
    goal: [f64; 2],
    t: usize,
    done: bool,
}

impl PointMass {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            pos: [0.0; 2],
            vel: [0.0; 2],
            goal: [1.0, 0.0],
            t: 0,
            done: true,
        }
    }

    /// Starts an episode from explicit positions, bypassing the seed.
    pub fn reset_to(&mut self, start: [f64; 2], goal: [f64; 2]) -> Vec<f64> {
        self.pos = start;
        self.vel = [0.0; 2];
        self.goal = goal;
        self.t = 0;
        self.done = false;
        self.obs()
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    fn obs(&self) -> Vec<f64> {
        vec![
            self.pos[0] - self.goal[0],
            self.pos[1] - self.goal[1],
            self.vel[0],
            self.vel[1],
        ]
    }
}

impl Environment for PointMass {
    fn obs_dim(&self) -> usize {
        4
    }

    fn act_dim(&self) -> usize {
        2
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn reward_bound(&self) -> f64 {
        // |p - goal| <= 1 + sum of |v| dt with |v| <= t dt (unit acceleration)
        let h = self.horizon as f64;
        1.0 + std::f64::consts::SQRT_2 * h * h * DT * DT + 2.0 * ACTION_COST
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let angle = Stream::new(seed).range_at(0, 0.0, std::f64::consts::TAU);
        self.reset_to([0.0, 0.0], [angle.cos(), angle.sin()])
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: action.len(),
            });
        }
        let a = [clip_unit(action[0]), clip_unit(action[1])];
        for k in 0..2 {
            self.vel[k] += a[k] * DT;
            self.pos[k] += self.vel[k] * DT;
        }
        let dist = ((self.pos[0] - self.goal[0]).powi(2) + (self.pos[1] - self.goal[1]).powi(2)).sqrt();
        let reward = -dist - ACTION_COST * (a[0] * a[0] + a[1] * a[1]);
        self.t += 1;
        self.done = self.t >= self.horizon;
        Ok(Step {
            obs: self.obs(),
            reward,
            done: self.done,
        })
    }
}
