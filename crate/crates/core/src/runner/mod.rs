//! Generation loop, parallel rollouts, evaluation and run output.
//!
//! A generation samples `N` connectivities (or Gaussian perturbations for
//! ES), rolls each out for one episode, shapes the returns by centered
//! rank, forms the population estimate and applies the configured update.
//! Every random draw is keyed by `(run seed, domain, generation, member)`,
//! and the reduction runs in member order after all rollouts finish, so the
//! result is independent of the worker count.

mod checkpoint;
mod config;
mod log;

pub use checkpoint::{Checkpoint, ParamKind};
pub use config::{EvalMode, InputEncoding, RunConfig};
pub use log::{read_run_csv, GenerationLog, RunLogWriter, RUN_CSV_HEADER, RUN_CSV_VERSION_LINE};

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::bernoulli::{kl_quadratic, sample, ProbVector, SeedTag};
use crate::env::{EnvConfig, EnvKind, Environment};
use crate::error::{Error, Result};
use crate::optim::{apply_update, ec_step, ec_tr_step, es_apply, satr_step, OptimizerKind};
use crate::rng::{Domain, Stream};
use crate::rsnn::{DenseNetwork, Network, SpikingPolicy, Topology};
use crate::shaping::{centered_rank, pairwise_sum, GradientAccumulator, NaturalGradient};

/// What is being optimized.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Bernoulli(ProbVector),
    /// Real weights in the connectivity layout (ES).
    Weights(Vec<f64>),
}

impl Params {
    pub fn len(&self) -> usize {
        match self {
            Self::Bernoulli(p) => p.len(),
            Self::Weights(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Self::Bernoulli(p) => p.probs(),
            Self::Weights(w) => w,
        }
    }

    pub fn as_probs(&self) -> Option<&ProbVector> {
        match self {
            Self::Bernoulli(p) => Some(p),
            Self::Weights(_) => None,
        }
    }
}

/// Result of rolling out one population member or evaluation episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutOutcome {
    pub ret: f64,
    pub spikes: u64,
    /// `d_h * substeps` summed over the episode.
    pub neuron_substeps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub mean_return: f64,
    pub spike_rate: f64,
    pub episodes: usize,
}

/// One run: a config, a seed and the current parameters.
pub struct Trainer {
    cfg: RunConfig,
    seed: u64,
    env_cfg: EnvConfig,
    topology: Option<Topology>,
    params: Params,
    generation: u64,
    pool: rayon::ThreadPool,
}

impl std::fmt::Debug for Trainer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trainer")
            .field("seed", &self.seed)
            .field("generation", &self.generation)
            .field("optimizer", &self.cfg.optimizer)
            .field("dimension", &self.params.len())
            .finish()
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

impl Trainer {
    pub fn new(cfg: RunConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.dimension()?;
        let params = match cfg.optimizer {
            OptimizerKind::Es => Params::Weights(vec![0.0; d]),
            _ => Params::Bernoulli(ProbVector::uniform(d, cfg.init_prob, cfg.clamp_eps)?),
        };
        Self::with_params(cfg, seed, params, 0)
    }

    fn with_params(cfg: RunConfig, seed: u64, params: Params, generation: u64) -> Result<Self> {
        let topology = cfg.topology()?;
        let env_cfg = cfg.env_config();
        let pool = build_pool(cfg.workers)?;
        Ok(Self {
            cfg,
            seed,
            env_cfg,
            topology,
            params,
            generation,
            pool,
        })
    }

    /// Restores a run. `cfg` overrides the stored config (e.g. to extend
    /// the generation count) but must describe the same problem.
    pub fn from_checkpoint(ckpt: &Checkpoint, cfg: Option<RunConfig>) -> Result<Self> {
        let stored = RunConfig::from_toml_str(&ckpt.config_toml)?;
        let cfg = cfg.unwrap_or(stored);
        if cfg.optimizer != ckpt.optimizer {
            return Err(Error::Checkpoint(format!(
                "checkpoint was written by `{}`, config asks for `{}`",
                ckpt.optimizer, cfg.optimizer
            )));
        }
        let d = cfg.dimension()?;
        if d != ckpt.params.len() {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: ckpt.params.len(),
            });
        }
        let params = match ckpt.kind {
            ParamKind::Bernoulli => Params::Bernoulli(ProbVector::new(ckpt.params.clone(), ckpt.clamp_eps)?),
            ParamKind::Weights => Params::Weights(ckpt.params.clone()),
        };
        Self::with_params(cfg, ckpt.run_seed, params, ckpt.next_generation)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let (kind, clamp_eps) = match &self.params {
            Params::Bernoulli(p) => (ParamKind::Bernoulli, p.eps()),
            Params::Weights(_) => (ParamKind::Weights, self.cfg.clamp_eps),
        };
        Checkpoint {
            optimizer: self.cfg.optimizer,
            kind,
            run_seed: self.seed,
            next_generation: self.generation,
            clamp_eps,
            params: self.params.values().to_vec(),
            config_toml: self.cfg.to_toml_string(),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn topology(&self) -> Option<&Topology> {
        self.topology.as_ref()
    }

    fn env_seed(&self, domain: Domain, generation: u64, member: u64) -> u64 {
        Stream::new(self.seed).domain(domain).derive(generation).derive(member).at(0)
    }

    fn perturbation_stream(&self, generation: u64, member: u64) -> (Stream, f64) {
        let (pair, sign) = if self.cfg.es_mirrored {
            (member / 2, if member % 2 == 0 { 1.0 } else { -1.0 })
        } else {
            (member, 1.0)
        };
        (
            Stream::new(self.seed).domain(Domain::Perturbation).derive(generation).derive(pair),
            sign,
        )
    }

    fn perturbation(&self, generation: u64, member: u64, out: &mut [f64]) {
        let (stream, sign) = self.perturbation_stream(generation, member);
        let sigma = self.cfg.es_sigma;
        for (i, e) in out.iter_mut().enumerate() {
            *e = sign * sigma * stream.normal_at(i as u64);
        }
    }

    fn rollout_bits(&self, bits: &[u8], env_seed: u64) -> Result<RolloutOutcome> {
        match &self.topology {
            None => self.score_direct(bits.iter().map(|&b| f64::from(b)).collect(), env_seed),
            Some(topo) => {
                let net = Network::from_bits(topo, bits)?;
                run_policy(&net, &self.env_cfg, self.cfg.input_encoding, self.cfg.input_gain, env_seed)
            }
        }
    }

    fn rollout_weights(&self, weights: &[f64], env_seed: u64) -> Result<RolloutOutcome> {
        match &self.topology {
            None => self.score_direct(weights.to_vec(), env_seed),
            Some(topo) => {
                let net = DenseNetwork::from_weights(topo, weights)?;
                run_policy(&net, &self.env_cfg, self.cfg.input_encoding, self.cfg.input_gain, env_seed)
            }
        }
    }

    /// Tasks without a network score the parameter vector as the action.
    fn score_direct(&self, action: Vec<f64>, env_seed: u64) -> Result<RolloutOutcome> {
        let mut env = self.env_cfg.build()?;
        let ret = crate::env::rollout(env.as_mut(), env_seed, |_| Ok(action.clone()))?;
        Ok(RolloutOutcome {
            ret,
            spikes: 0,
            neuron_substeps: 0,
        })
    }

    /// Runs one generation and advances the parameters. On a rollout error
    /// nothing changes.
    pub fn run_generation(&mut self) -> Result<GenerationLog> {
        let started = Instant::now();
        let gen = self.generation;
        let n = self.cfg.pop_size;

        let (next, log) = match &self.params {
            Params::Bernoulli(rho) => self.bernoulli_generation(rho, gen, n)?,
            Params::Weights(w) => self.es_generation(w, gen, n)?,
        };
        self.params = next;
        self.generation += 1;

        let eval_return = if self.eval_due(gen) {
            Some(self.evaluate()?.mean_return)
        } else {
            None
        };
        Ok(GenerationLog {
            eval_return,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            ..log
        })
    }

    fn eval_due(&self, gen: u64) -> bool {
        let every = self.cfg.eval_every as u64;
        self.cfg.eval_episodes > 0
            && ((every > 0 && (gen + 1) % every == 0) || gen + 1 == self.cfg.generations as u64)
    }

    fn bernoulli_generation(&self, rho: &ProbVector, gen: u64, n: usize) -> Result<(Params, GenerationLog)> {
        let outcomes: Vec<(Vec<u8>, RolloutOutcome)> = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|m| {
                    let theta = sample(rho, SeedTag::train(self.seed, gen, m as u64));
                    let env_seed = self.env_seed(Domain::TrainEnv, gen, m as u64);
                    self.rollout_bits(&theta.bits, env_seed)
                        .map(|o| (theta.bits, o))
                        .map_err(|e| Error::Rollout {
                            member: m,
                            source: Box::new(e),
                        })
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let returns: Vec<f64> = outcomes.iter().map(|(_, o)| o.ret).collect();
        let shaped = centered_rank(&returns)?;
        let mut acc = GradientAccumulator::new(rho);
        for ((bits, _), &w) in outcomes.iter().zip(&shaped) {
            acc.add(bits, w)?;
        }
        let grad = acc.finish();

        let delta = match self.cfg.optimizer {
            OptimizerKind::Satr => satr_step(rho, &grad, self.cfg.satr())?,
            OptimizerKind::Ec => ec_step(rho, &grad, self.cfg.eta)?,
            OptimizerKind::EcTr => ec_tr_step(rho, &grad, self.cfg.tr())?.delta,
            OptimizerKind::Es => unreachable!("ES optimizes real weights"),
        };
        let step_kl = kl_quadratic(rho, &delta)?;
        let next = apply_update(rho, &delta)?;
        let log = summarize(gen, &returns, &outcomes.iter().map(|(_, o)| o).collect::<Vec<_>>(), &grad);
        let log = GenerationLog {
            step_kl: Some(step_kl),
            min_param: next.min(),
            max_param: next.max(),
            ..log
        };
        Ok((Params::Bernoulli(next), log))
    }

    fn es_generation(&self, w: &[f64], gen: u64, n: usize) -> Result<(Params, GenerationLog)> {
        let d = w.len();
        let outcomes: Vec<RolloutOutcome> = self.pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|m| {
                    let mut eps = vec![0.0; d];
                    self.perturbation(gen, m as u64, &mut eps);
                    let perturbed: Vec<f64> = w.iter().zip(&eps).map(|(a, b)| a + b).collect();
                    let env_seed = self.env_seed(Domain::TrainEnv, gen, m as u64);
                    self.rollout_weights(&perturbed, env_seed).map_err(|e| Error::Rollout {
                        member: m,
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let returns: Vec<f64> = outcomes.iter().map(|o| o.ret).collect();
        let shaped = centered_rank(&returns)?;
        let mut direction = vec![0.0; d];
        let mut eps = vec![0.0; d];
        for (m, &s) in shaped.iter().enumerate() {
            self.perturbation(gen, m as u64, &mut eps);
            for (acc, &e) in direction.iter_mut().zip(&eps) {
                *acc += s * e;
            }
        }
        let es = self.cfg.es();
        let scale = 1.0 / (n as f64 * es.sigma);
        let grad = NaturalGradient::from_vec(direction.iter().map(|x| x * scale).collect(), n);
        let next = es_apply(w, &direction, n, es);
        let log = summarize(gen, &returns, &outcomes.iter().collect::<Vec<_>>(), &grad);
        let log = GenerationLog {
            step_kl: None,
            min_param: next.iter().copied().fold(f64::INFINITY, f64::min),
            max_param: next.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ..log
        };
        Ok((Params::Weights(next), log))
    }

    /// Mean undiscounted return over the configured evaluation episodes.
    /// Uses its own random domain and never touches the parameters.
    pub fn evaluate(&self) -> Result<EvalReport> {
        self.evaluate_episodes(self.cfg.eval_episodes)
    }

    pub fn evaluate_episodes(&self, episodes: usize) -> Result<EvalReport> {
        if episodes == 0 {
            return Err(Error::InvalidParameter("need at least one evaluation episode".into()));
        }
        let outcomes: Vec<RolloutOutcome> = self.pool.install(|| {
            (0..episodes)
                .into_par_iter()
                .map(|ep| {
                    let env_seed = self.env_seed(Domain::EvalEnv, 0, ep as u64);
                    match &self.params {
                        Params::Bernoulli(rho) => {
                            let bits = match self.cfg.eval_mode {
                                EvalMode::Sample => sample(rho, SeedTag::eval(self.seed, ep as u64)).bits,
                                EvalMode::Map => rho.mode(),
                            };
                            self.rollout_bits(&bits, env_seed)
                        }
                        Params::Weights(w) => self.rollout_weights(w, env_seed),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let returns: Vec<f64> = outcomes.iter().map(|o| o.ret).collect();
        Ok(EvalReport {
            mean_return: pairwise_sum(&returns) / episodes as f64,
            spike_rate: spike_rate(&outcomes.iter().collect::<Vec<_>>()),
            episodes,
        })
    }
}

fn spike_rate(outcomes: &[&RolloutOutcome]) -> f64 {
    let spikes: u64 = outcomes.iter().map(|o| o.spikes).sum();
    let denom: u64 = outcomes.iter().map(|o| o.neuron_substeps).sum();
    if denom == 0 {
        0.0
    } else {
        spikes as f64 / denom as f64
    }
}

fn summarize(gen: u64, returns: &[f64], outcomes: &[&RolloutOutcome], grad: &NaturalGradient) -> GenerationLog {
    GenerationLog {
        generation: gen,
        mean_return: pairwise_sum(returns) / returns.len() as f64,
        max_return: returns.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        eval_return: None,
        grad_energy: grad.energy,
        step_kl: None,
        min_param: 0.0,
        max_param: 0.0,
        spike_rate: spike_rate(outcomes),
        wall_ms: 0.0,
    }
}

/// One episode of `policy` on a fresh environment instance.
pub fn run_policy(
    policy: &dyn SpikingPolicy,
    env_cfg: &EnvConfig,
    encoding: InputEncoding,
    gain: f64,
    env_seed: u64,
) -> Result<RolloutOutcome> {
    let mut env: Box<dyn Environment> = env_cfg.build()?;
    let mut state = policy.initial_state();
    let mut encoded = Vec::with_capacity(policy.topology().d_in);
    let ret = crate::env::rollout(env.as_mut(), env_seed, |obs| {
        encoding.encode(obs, gain, &mut encoded);
        let action = policy.policy_step(&mut state, &encoded)?;
        Ok(action.into_iter().map(f64::from).collect())
    })?;
    Ok(RolloutOutcome {
        ret,
        spikes: state.spike_total,
        neuron_substeps: state.substep_total * policy.topology().d_h as u64,
    })
}

/// What [`train`] produced for one seed.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub seed: u64,
    pub logs: Vec<GenerationLog>,
    pub checkpoint: Checkpoint,
    pub run_dir: PathBuf,
}

/// Where a seed's files go: `out_dir` itself for single-seed configs,
/// `out_dir/seed-<k>` otherwise.
pub fn run_dir(cfg: &RunConfig, seed: u64) -> PathBuf {
    if cfg.seeds.len() == 1 {
        cfg.out_dir.clone()
    } else {
        cfg.out_dir.join(format!("seed-{seed}"))
    }
}

/// Runs generations until `cfg.generations` for one seed, writing
/// `run.csv`, `timing.csv` and `checkpoint.bin` into `dir`. With `resume`
/// the run continues from the checkpoint and rows are appended.
pub fn train_seed(cfg: &RunConfig, seed: u64, dir: &Path, resume: Option<&Checkpoint>) -> Result<TrainOutcome> {
    let mut trainer = match resume {
        Some(ckpt) => {
            if ckpt.run_seed != seed {
                return Err(Error::Checkpoint(format!(
                    "checkpoint seed {} does not match requested seed {seed}",
                    ckpt.run_seed
                )));
            }
            Trainer::from_checkpoint(ckpt, Some(cfg.clone()))?
        }
        None => Trainer::new(cfg.clone(), seed)?,
    };
    let mut writer = RunLogWriter::open(dir, resume.is_some())?;
    let mut logs = Vec::new();
    while trainer.generation() < cfg.generations as u64 {
        let row = trainer.run_generation()?;
        writer.write(&row)?;
        logs.push(row);
    }
    let checkpoint = trainer.checkpoint();
    checkpoint.save(&dir.join("checkpoint.bin"))?;
    Ok(TrainOutcome {
        seed,
        logs,
        checkpoint,
        run_dir: dir.to_path_buf(),
    })
}

/// Trains every configured seed in turn.
pub fn train(cfg: &RunConfig) -> Result<Vec<TrainOutcome>> {
    cfg.seeds
        .iter()
        .map(|&seed| train_seed(cfg, seed, &run_dir(cfg, seed), None))
        .collect()
}

/// Whether the configured task is scored without a network.
pub fn is_direct(cfg: &RunConfig) -> bool {
    cfg.env == EnvKind::PatternMatch
}
