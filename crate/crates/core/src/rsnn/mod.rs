//! Leaky integrate-and-fire recurrent spiking policy.
//!
//! The network has a linear read-in from continuous observations, one
//! recurrent spiking layer whose presynaptic neurons obey Dale's law (the
//! first `floor(exc_ratio * d_h)` are excitatory, the rest inhibitory), and
//! a leaky readout whose traces are the actions.
//!
//! Per substep, with `a_x = exp(-dt / tau_x)`:
//!
//! ```text
//! i_syn <- a_syn * i_syn + R_h * (exc - inh)(s)
//! v     <- a_m * v + i_syn * dt + R_in * (W_in obs) * dt
//! s      = v >= v_th ; v <- 0 where s
//! y     <- a_out * y + R_out * (exc - inh)_out(s) * dt
//! ```
//!
//! Two engines share this update and differ only in how synaptic
//! integration is carried out: [`Network`] uses packed bitsets and
//! AND+popcount, [`DenseNetwork`] uses dense `f32` matrices.

mod bitset_net;
mod dense_net;

pub use bitset_net::Network;
pub use dense_net::DenseNetwork;

use serde::{Deserialize, Serialize};

use crate::bitset::PackedBitVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub d_in: usize,
    pub d_h: usize,
    pub d_out: usize,
    pub exc_ratio: f64,
    /// Simulation timestep in ms.
    pub dt: f64,
    pub tau_syn: f64,
    pub tau_m: f64,
    pub tau_out: f64,
    /// Substeps per environment step when `substep_pattern` is empty.
    pub substeps: usize,
    /// Cycled per environment step, e.g. `[33, 33, 33, 33, 34]`.
    pub substep_pattern: Vec<usize>,
    pub v_th: f64,
}

impl Topology {
    pub fn new(d_in: usize, d_h: usize, d_out: usize) -> Self {
        Self {
            d_in,
            d_h,
            d_out,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.d_in == 0 || self.d_h == 0 || self.d_out == 0 {
            return bad("topology dimensions must be positive");
        }
        if !(0.0..=1.0).contains(&self.exc_ratio) {
            return bad("exc_ratio must lie in [0, 1]");
        }
        if !(self.dt > 0.0 && self.tau_syn > 0.0 && self.tau_m > 0.0 && self.tau_out > 0.0) {
            return bad("dt and time constants must be positive");
        }
        if self.substeps == 0 && self.substep_pattern.is_empty() {
            return bad("substeps must be at least 1");
        }
        if self.substep_pattern.iter().any(|&k| k == 0) {
            return bad("substep_pattern entries must be at least 1");
        }
        Ok(())
    }

    pub fn n_exc(&self) -> usize {
        (self.exc_ratio * self.d_h as f64).floor() as usize
    }

    pub fn is_excitatory(&self, neuron: usize) -> bool {
        neuron < self.n_exc()
    }

    pub fn readin_len(&self) -> usize {
        self.d_in * self.d_h
    }

    pub fn recurrent_len(&self) -> usize {
        self.d_h * self.d_h
    }

    pub fn readout_len(&self) -> usize {
        self.d_h * self.d_out
    }

    /// Total synapse count: the dimension of the connectivity vector.
    pub fn synapse_count(&self) -> usize {
        self.readin_len() + self.recurrent_len() + self.readout_len()
    }

    /// Splits a connectivity vector into (read-in, recurrent, read-out),
    /// each row-major with one row per postsynaptic unit.
    pub fn split<'a, T>(&self, theta: &'a [T]) -> Result<(&'a [T], &'a [T], &'a [T])> {
        if theta.len() != self.synapse_count() {
            return Err(Error::DimensionMismatch {
                expected: self.synapse_count(),
                actual: theta.len(),
            });
        }
        let (readin, rest) = theta.split_at(self.readin_len());
        let (rec, out) = rest.split_at(self.recurrent_len());
        Ok((readin, rec, out))
    }

    pub fn r_in(&self) -> f64 {
        0.15 * self.tau_m * (2.0 / self.d_in as f64).sqrt()
    }

    pub fn r_h(&self) -> f64 {
        1.0 * (self.tau_m / self.tau_syn) * (2.0 / self.d_h as f64).sqrt()
    }

    pub fn r_out(&self) -> f64 {
        5.0 * self.tau_out * (2.0 / self.d_h as f64).sqrt()
    }

    pub fn substeps_for(&self, env_step: u64) -> usize {
        if self.substep_pattern.is_empty() {
            self.substeps
        } else {
            self.substep_pattern[(env_step % self.substep_pattern.len() as u64) as usize]
        }
    }

    pub(crate) fn constants(&self) -> LifConstants {
        LifConstants {
            alpha_syn: (-self.dt / self.tau_syn).exp() as f32,
            alpha_m: (-self.dt / self.tau_m).exp() as f32,
            alpha_out: (-self.dt / self.tau_out).exp() as f32,
            r_in: self.r_in() as f32,
            r_h: self.r_h() as f32,
            r_out: self.r_out() as f32,
            dt: self.dt as f32,
            v_th: self.v_th as f32,
        }
    }

    /// Upper bound on `|y|` when every hidden neuron spikes every substep.
    pub fn readout_bound(&self) -> f64 {
        let alpha = (-self.dt / self.tau_out).exp();
        self.r_out() * self.d_h as f64 * self.dt / (1.0 - alpha)
    }
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            d_in: 1,
            d_h: 256,
            d_out: 1,
            exc_ratio: 0.5,
            dt: 0.5,
            tau_syn: 5.0,
            tau_m: 10.0,
            tau_out: 10.0,
            substeps: 33,
            substep_pattern: Vec::new(),
            v_th: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LifConstants {
    pub alpha_syn: f32,
    pub alpha_m: f32,
    pub alpha_out: f32,
    pub r_in: f32,
    pub r_h: f32,
    pub r_out: f32,
    pub dt: f32,
    pub v_th: f32,
}

/// Per-rollout scratch buffers; owned by the state so the network itself
/// stays immutable and shareable.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    pub packed: PackedBitVector<u64>,
    pub s_f32: Vec<f32>,
    pub ints: Vec<i32>,
    pub ints_out: Vec<i32>,
    pub readin: Vec<f32>,
    pub drive: Vec<f32>,
    pub out: Vec<f32>,
}

/// Membrane, synaptic and readout traces of one rollout.
#[derive(Debug, Clone)]
pub struct LifState {
    pub v: Vec<f32>,
    pub i_syn: Vec<f32>,
    pub s: Vec<u8>,
    pub y: Vec<f32>,
    pub env_steps: u64,
    pub spike_total: u64,
    pub substep_total: u64,
    pub(crate) scratch: Scratch,
}

impl LifState {
    pub fn new(topology: &Topology) -> Self {
        let (d_h, d_out) = (topology.d_h, topology.d_out);
        Self {
            v: vec![0.0; d_h],
            i_syn: vec![0.0; d_h],
            s: vec![0; d_h],
            y: vec![0.0; d_out],
            env_steps: 0,
            spike_total: 0,
            substep_total: 0,
            scratch: Scratch {
                packed: PackedBitVector::zeros(d_h),
                s_f32: vec![0.0; d_h],
                ints: vec![0; d_h],
                ints_out: vec![0; d_out],
                readin: vec![0.0; d_h],
                drive: vec![0.0; d_h],
                out: vec![0.0; d_out],
            },
        }
    }

    pub fn reset(&mut self) {
        self.v.fill(0.0);
        self.i_syn.fill(0.0);
        self.s.fill(0);
        self.y.fill(0.0);
        self.env_steps = 0;
        self.spike_total = 0;
        self.substep_total = 0;
        let d_h = self.s.len();
        self.scratch.packed = PackedBitVector::zeros(d_h);
        self.scratch.s_f32.fill(0.0);
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().all(|&x| x == 0.0)
            && self.i_syn.iter().all(|&x| x == 0.0)
            && self.s.iter().all(|&x| x == 0)
            && self.y.iter().all(|&x| x == 0.0)
    }

    /// Mean spikes per hidden neuron per substep since the last reset.
    pub fn spike_rate(&self) -> f64 {
        if self.substep_total == 0 {
            0.0
        } else {
            self.spike_total as f64 / (self.s.len() as f64 * self.substep_total as f64)
        }
    }
}

/// How an engine realizes the three synaptic integrations.
pub(crate) trait Synapses {
    fn topology(&self) -> &Topology;
    /// `W_in obs`, without the `R_in` gain.
    fn readin(&self, obs: &[f32], out: &mut [f32]);
    /// Called after each spike update so both integrations below see `s`.
    fn load_spikes(&self, s: &[u8], scratch: &mut Scratch);
    fn recurrent(&self, scratch: &mut Scratch);
    fn readout(&self, scratch: &mut Scratch);
}

fn check_obs(obs: &[f32], d_in: usize) -> Result<()> {
    if obs.len() != d_in {
        return Err(Error::DimensionMismatch {
            expected: d_in,
            actual: obs.len(),
        });
    }
    if let Some(i) = obs.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteObservation(i));
    }
    Ok(())
}

pub(crate) fn simulate_env_step<S: Synapses>(
    syn: &S,
    state: &mut LifState,
    obs: &[f32],
    mut observer: impl FnMut(usize, &[u8]),
) -> Result<Vec<f32>> {
    let topo = syn.topology();
    check_obs(obs, topo.d_in)?;
    if state.v.len() != topo.d_h || state.y.len() != topo.d_out {
        return Err(Error::DimensionMismatch {
            expected: topo.d_h,
            actual: state.v.len(),
        });
    }
    let c = topo.constants();
    let k_sub = topo.substeps_for(state.env_steps);
    syn.readin(obs, &mut state.scratch.readin);

    for k in 0..k_sub {
        syn.recurrent(&mut state.scratch);
        let mut fired = 0u64;
        for j in 0..topo.d_h {
            let i_syn = c.alpha_syn * state.i_syn[j] + c.r_h * state.scratch.drive[j];
            let v = c.alpha_m * state.v[j] + i_syn * c.dt + c.r_in * state.scratch.readin[j] * c.dt;
            state.i_syn[j] = i_syn;
            if v >= c.v_th {
                state.s[j] = 1;
                state.v[j] = 0.0;
                fired += 1;
            } else {
                state.s[j] = 0;
                state.v[j] = v;
            }
        }
        syn.load_spikes(&state.s, &mut state.scratch);
        syn.readout(&mut state.scratch);
        for (y, &o) in state.y.iter_mut().zip(&state.scratch.out) {
            *y = c.alpha_out * *y + c.r_out * o * c.dt;
        }
        state.spike_total += fired;
        observer(k, &state.s);
    }
    state.substep_total += k_sub as u64;
    state.env_steps += 1;
    Ok(state.y.clone())
}

/// Anything that maps observations to actions through a [`LifState`].
pub trait SpikingPolicy: Send + Sync {
    fn topology(&self) -> &Topology;

    fn policy_step(&self, state: &mut LifState, obs: &[f32]) -> Result<Vec<f32>>;

    /// As [`SpikingPolicy::policy_step`], calling `observer(substep, spikes)`
    /// after every substep.
    fn policy_step_traced(
        &self,
        state: &mut LifState,
        obs: &[f32],
        observer: &mut dyn FnMut(usize, &[u8]),
    ) -> Result<Vec<f32>>;

    fn initial_state(&self) -> LifState {
        LifState::new(self.topology())
    }
}

macro_rules! impl_policy {
    ($t:ty) => {
        impl $crate::rsnn::SpikingPolicy for $t {
            fn topology(&self) -> &$crate::rsnn::Topology {
                $crate::rsnn::Synapses::topology(self)
            }

            fn policy_step(
                &self,
                state: &mut $crate::rsnn::LifState,
                obs: &[f32],
            ) -> $crate::error::Result<Vec<f32>> {
                $crate::rsnn::simulate_env_step(self, state, obs, |_, _| {})
            }

            fn policy_step_traced(
                &self,
                state: &mut $crate::rsnn::LifState,
                obs: &[f32],
                observer: &mut dyn FnMut(usize, &[u8]),
            ) -> $crate::error::Result<Vec<f32>> {
                $crate::rsnn::simulate_env_step(self, state, obs, observer)
            }
        }
    };
}
pub(crate) use impl_policy;
