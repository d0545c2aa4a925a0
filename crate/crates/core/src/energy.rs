//! Analytical on-chip energy estimate for spiking rollouts.
//!
//! ```text
//! E_one = P_u N I S + (P_s + C P_w) N R S
//! E_tot = E_one G P
//! ```
//!
//! Per-operation energies are given in picojoules; every returned value is
//! in joules.

use crate::error::{Error, Result};

const PJ: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Energy per synaptic spike op, pJ.
    pub p_s_pj: f64,
    /// Within-tile spike energy, pJ.
    pub p_w_pj: f64,
    /// Energy per neuron update, pJ.
    pub p_u_pj: f64,
    pub generations: f64,
    pub population: f64,
    /// Timesteps per rollout.
    pub timesteps: f64,
    pub neurons: f64,
    /// Average spikes per neuron per timestep.
    pub spike_rate: f64,
    pub connections: f64,
    /// Update ops per neuron per timestep.
    pub update_ops: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            p_s_pj: 23.6,
            p_w_pj: 1.7,
            p_u_pj: 81.0,
            generations: 2000.0,
            population: 1024.0,
            timesteps: 33_200.0,
            neurons: 256.0,
            spike_rate: 0.025,
            connections: 128.0,
            update_ops: 4.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_s", self.p_s_pj),
            ("p_w", self.p_w_pj),
            ("p_u", self.p_u_pj),
            ("generations", self.generations),
            ("population", self.population),
            ("timesteps", self.timesteps),
            ("neurons", self.neurons),
            ("spike_rate", self.spike_rate),
            ("connections", self.connections),
            ("update_ops", self.update_ops),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn update_energy(&self) -> f64 {
        self.p_u_pj * PJ * self.neurons * self.update_ops * self.timesteps
    }

    pub fn synaptic_energy(&self) -> f64 {
        (self.p_s_pj + self.connections * self.p_w_pj) * PJ * self.neurons * self.spike_rate * self.timesteps
    }
}

/// Joules for one policy evaluation.
pub fn energy_per_rollout(p: &EnergyParams) -> f64 {
    p.update_energy() + p.synaptic_energy()
}

pub fn total_energy(p: &EnergyParams) -> f64 {
    energy_per_rollout(p) * p.generations * p.population
}

/// Per-substep hidden spike counts from one or more rollouts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrace {
    pub neurons: usize,
    pub counts: Vec<u64>,
}

/// Total spikes divided by `neurons * substeps`.
pub fn measured_spike_rate(trace: &SpikeTrace) -> Result<f64> {
    if trace.counts.is_empty() || trace.neurons == 0 {
        return Err(Error::EmptyTrace);
    }
    let total: u64 = trace.counts.iter().sum();
    Ok(total as f64 / (trace.neurons as f64 * trace.counts.len() as f64))
}

/// Table of total training energy per population size, in the layout
/// `Population size P | ...` / `Estimated RSNN on-chip energy [kJ] | ...`.
pub fn format_energy_table(base: &EnergyParams, pops: &[u64], measured_rate: Option<f64>) -> String {
    let mut rows = vec![("Population size P".to_string(), pops.iter().map(|p| p.to_string()).collect::<Vec<_>>())];
    let kj = |rate: f64| {
        pops.iter()
            .map(|&p| {
                let params = EnergyParams {
                    population: p as f64,
                    spike_rate: rate,
                    ..*base
                };
                format!("{:.1}", total_energy(&params) / 1e3)
            })
            .collect::<Vec<_>>()
    };
    rows.push((format!("Estimated RSNN on-chip energy [kJ] (R={})", base.spike_rate), kj(base.spike_rate)));
    if let Some(r) = measured_rate {
        rows.push((format!("Estimated RSNN on-chip energy [kJ] (measured R={r:.4})"), kj(r)));
    }
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let col_w = rows
        .iter()
        .flat_map(|(_, c)| c.iter().map(String::len))
        .max()
        .unwrap_or(0)
        .max(6);
    let mut out = String::new();
    for (label, cols) in rows {
        out.push_str(&format!("{label:<label_w$}"));
        for c in cols {
            out.push_str(&format!(" | {c:>col_w$}"));
        }
        out.push('\n');
    }
    out
}
