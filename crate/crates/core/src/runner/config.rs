use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bernoulli::DEFAULT_CLAMP_EPS;
use crate::env::{EnvConfig, EnvKind};
use crate::error::{Error, Result};
use crate::optim::{EsConfig, OptimizerKind, SatrConfig, TrConfig, TrNormalization};
use crate::rsnn::Topology;

/// How continuous observations become read-in currents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputEncoding {
    /// Observation components feed the read-in unchanged.
    Linear,
    /// Each component `x` becomes the pair `(max(x, 0), max(-x, 0))`, so a
    /// nonnegative binary read-in can react to either sign.
    #[default]
    SignSplit,
}

impl InputEncoding {
    pub fn width(self, obs_dim: usize) -> usize {
        match self {
            Self::Linear => obs_dim,
            Self::SignSplit => 2 * obs_dim,
        }
    }

    pub fn encode(self, obs: &[f64], gain: f64, out: &mut Vec<f32>) {
        out.clear();
        match self {
            Self::Linear => out.extend(obs.iter().map(|&x| (gain * x) as f32)),
            Self::SignSplit => {
                for &x in obs {
                    let x = gain * x;
                    out.push(x.max(0.0) as f32);
                    out.push((-x).max(0.0) as f32);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Each evaluation episode samples its own connectivity.
    #[default]
    Sample,
    /// Every episode uses `rho >= 0.5`.
    Map,
}

/// Flat key-value run description, read from TOML.
///
/// Unknown keys are rejected. See the README for the full schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvKind,
    /// `None` picks the environment default (1, 200 or 1000 steps).
    pub horizon: Option<usize>,
    pub pattern_d: usize,
    pub pattern_target_seed: u64,

    pub optimizer: OptimizerKind,
    pub pop_size: usize,
    pub generations: usize,
    /// Step size shared by SATR, EC and ES.
    pub eta: f64,
    pub tr_delta_per_param: f64,
    pub tr_normalization: TrNormalization,
    pub es_sigma: f64,
    pub es_weight_decay: f64,
    pub es_mirrored: bool,

    pub d_h: usize,
    pub exc_ratio: f64,
    pub dt: f64,
    pub tau_syn: f64,
    pub tau_m: f64,
    pub tau_out: f64,
    pub substeps: usize,
    pub substep_pattern: Vec<usize>,
    pub v_th: f64,
    pub input_encoding: InputEncoding,
    /// Observations are multiplied by this before encoding.
    pub input_gain: f64,

    pub init_prob: f64,
    pub clamp_eps: f64,

    pub seeds: Vec<u64>,
    pub eval_episodes: usize,
    pub eval_every: usize,
    pub eval_mode: EvalMode,
    /// Rollout threads; 0 uses one per core. Results do not depend on it.
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let topo = Topology::default();
        let es = EsConfig::default();
        Self {
            env: EnvKind::PoleBalance,
            horizon: None,
            pattern_d: 64,
            pattern_target_seed: 0,
            optimizer: OptimizerKind::Satr,
            pop_size: 256,
            generations: 100,
            eta: SatrConfig::default().eta,
            tr_delta_per_param: TrConfig::default().delta_per_param,
            tr_normalization: TrNormalization::default(),
            es_sigma: es.sigma,
            es_weight_decay: es.weight_decay,
            es_mirrored: es.mirrored,
            d_h: topo.d_h,
            exc_ratio: topo.exc_ratio,
            dt: topo.dt,
            tau_syn: topo.tau_syn,
            tau_m: topo.tau_m,
            tau_out: topo.tau_out,
            substeps: topo.substeps,
            substep_pattern: Vec::new(),
            v_th: topo.v_th,
            input_encoding: InputEncoding::default(),
            input_gain: 1.0,
            init_prob: 0.5,
            clamp_eps: DEFAULT_CLAMP_EPS,
            seeds: vec![0],
            eval_episodes: 128,
            eval_every: 10,
            eval_mode: EvalMode::default(),
            workers: 0,
            out_dir: PathBuf::from("runs"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.pop_size < 2 {
            return bad(format!("pop_size must be at least 2, got {}", self.pop_size));
        }
        if self.generations < 1 {
            return bad("generations must be at least 1".into());
        }
        if self.optimizer == OptimizerKind::Es && self.es_mirrored && self.pop_size % 2 != 0 {
            return bad("mirrored ES needs an even pop_size".into());
        }
        if !(self.eta > 0.0) {
            return bad("eta must be positive".into());
        }
        if !(self.tr_delta_per_param > 0.0) {
            return bad("tr_delta_per_param must be positive".into());
        }
        if !(self.input_gain.is_finite() && self.input_gain > 0.0) {
            return bad("input_gain must be positive".into());
        }
        if !(self.es_sigma > 0.0) {
            return bad("es_sigma must be positive".into());
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return bad("clamp_eps must lie in (0, 0.5)".into());
        }
        if !(self.init_prob >= self.clamp_eps && self.init_prob <= 1.0 - self.clamp_eps) {
            return bad("init_prob must lie in [clamp_eps, 1 - clamp_eps]".into());
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.horizon == Some(0) {
            return bad("horizon must be at least 1".into());
        }
        if self.env == EnvKind::PatternMatch && self.pattern_d == 0 {
            return bad("pattern_d must be positive".into());
        }
        if self.env != EnvKind::PatternMatch {
            self.topology_for(1, 1).validate()?;
        }
        Ok(())
    }

    pub fn env_config(&self) -> EnvConfig {
        let horizon = self.horizon.unwrap_or(match self.env {
            EnvKind::PatternMatch => 1,
            EnvKind::Pointmass => 200,
            EnvKind::PoleBalance => 1000,
        });
        EnvConfig {
            kind: self.env,
            horizon,
            pattern_d: self.pattern_d,
            pattern_target_seed: self.pattern_target_seed,
        }
    }

    fn topology_for(&self, obs_dim: usize, act_dim: usize) -> Topology {
        Topology {
            d_in: self.input_encoding.width(obs_dim),
            d_h: self.d_h,
            d_out: act_dim,
            exc_ratio: self.exc_ratio,
            dt: self.dt,
            tau_syn: self.tau_syn,
            tau_m: self.tau_m,
            tau_out: self.tau_out,
            substeps: self.substeps,
            substep_pattern: self.substep_pattern.clone(),
            v_th: self.v_th,
        }
    }

    /// Network shape for the configured environment; `None` for tasks that
    /// score the connectivity directly.
    pub fn topology(&self) -> Result<Option<Topology>> {
        if self.env == EnvKind::PatternMatch {
            return Ok(None);
        }
        let env = self.env_config().build()?;
        let topo = self.topology_for(env.obs_dim(), env.act_dim());
        topo.validate()?;
        Ok(Some(topo))
    }

    /// Length of the optimized parameter vector.
    pub fn dimension(&self) -> Result<usize> {
        Ok(match self.topology()? {
            Some(t) => t.synapse_count(),
            None => self.pattern_d,
        })
    }

    pub fn satr(&self) -> SatrConfig {
        SatrConfig { eta: self.eta }
    }

    pub fn tr(&self) -> TrConfig {
        TrConfig {
            delta_per_param: self.tr_delta_per_param,
            normalization: self.tr_normalization,
        }
    }

    pub fn es(&self) -> EsConfig {
        EsConfig {
            eta: self.eta,
            sigma: self.es_sigma,
            weight_decay: self.es_weight_decay,
            mirrored: self.es_mirrored,
        }
    }
}
