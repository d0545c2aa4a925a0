use crate::error::{Error, Result};
use crate::rng::Stream;

use super::{clip_unit, Environment, Step};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const HALF_LENGTH: f64 = 0.5;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const THETA_LIMIT: f64 = 12.0 * std::f64::consts::PI / 180.0;
const X_LIMIT: f64 = 2.4;

/// Cart-pole with a continuous force in `[-1, 1] * 10 N`.
///
/// Observation `(x, x_dot, theta, theta_dot)`; reward +1 for every step that
/// ends upright. Integrated with semi-implicit Euler at 0.02 s. Reset seeds
/// draw each state component uniformly from `[-0.05, 0.05]`.
#[derive(Debug, Clone)]
pub struct PoleBalance {
    horizon: usize,
    state: [f64; 4],
    t: usize,
    done: bool,
}

impl PoleBalance {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            state: [0.0; 4],
            t: 0,
            done: true,
        }
    }

    pub fn reset_to(&mut self, state: [f64; 4]) -> Vec<f64> {
        self.state = state;
        self.t = 0;
        self.done = false;
        state.to_vec()
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    fn upright(&self) -> bool {
        self.state[0].abs() <= X_LIMIT && self.state[2].abs() <= THETA_LIMIT
    }
}

impl Environment for PoleBalance {
    fn obs_dim(&self) -> usize {
        4
    }

    fn act_dim(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn reward_bound(&self) -> f64 {
        1.0
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let s = Stream::new(seed);
        let state = [0, 1, 2, 3].map(|i| s.range_at(i, -0.05, 0.05));
        self.reset_to(state)
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                actual: action.len(),
            });
        }
        let force = FORCE_MAG * clip_unit(action[0]);
        let [x, x_dot, theta, theta_dot] = self.state;
        let (sin, cos) = theta.sin_cos();
        let total_mass = MASS_CART + MASS_POLE;
        let pole_ml = MASS_POLE * HALF_LENGTH;
        let temp = (force + pole_ml * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / total_mass));
        let x_acc = temp - pole_ml * theta_acc * cos / total_mass;

        let x_dot = x_dot + TAU * x_acc;
        let x = x + TAU * x_dot;
        let theta_dot = theta_dot + TAU * theta_acc;
        let theta = theta + TAU * theta_dot;
        self.state = [x, x_dot, theta, theta_dot];
        self.t += 1;

        let upright = self.upright();
        self.done = !upright || self.t >= self.horizon;
        Ok(Step {
            obs: self.state.to_vec(),
            reward: if upright { 1.0 } else { 0.0 },
            done: self.done,
        })
    }
}
