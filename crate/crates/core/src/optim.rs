//! Update rules mapping a population gradient estimate to a parameter step.
//!
//! Three act on Bernoulli means (`satr_step`, `ec_step`, `ec_tr_step`);
//! `es_step` is the Gaussian-perturbation baseline over real weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bernoulli::{clamp, ProbVector};
use crate::error::{Error, Result};
use crate::shaping::NaturalGradient;

/// Signal-adaptive trust region. `eta = sqrt(2 * delta)` where `delta`
/// scales the per-coordinate KL budget `delta * g_i^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatrConfig {
    pub eta: f64,
}

impl Default for SatrConfig {
    fn default() -> Self {
        Self { eta: 0.15 }
    }
}

/// Denominator used by the fixed-budget trust region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrNormalization {
    /// `sqrt(g^T F g)`: the constraint `0.5 * step^T F step = budget` holds.
    #[default]
    FisherMetric,
    /// `sqrt(g^T F^{-1} g)`, the alternative rendering of the same step.
    InverseFisher,
}

/// Fixed KL budget `delta_total = delta_per_param * d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrConfig {
    pub delta_per_param: f64,
    #[serde(default)]
    pub normalization: TrNormalization,
}

impl Default for TrConfig {
    fn default() -> Self {
        Self {
            delta_per_param: 1e-4,
            normalization: TrNormalization::FisherMetric,
        }
    }
}

impl TrConfig {
    pub fn budget(&self, d: usize) -> f64 {
        self.delta_per_param * d as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsConfig {
    pub eta: f64,
    pub sigma: f64,
    pub weight_decay: f64,
    pub mirrored: bool,
}

impl Default for EsConfig {
    fn default() -> Self {
        Self {
            eta: 0.15,
            sigma: 0.3,
            weight_decay: 0.1,
            mirrored: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Satr,
    Ec,
    EcTr,
    Es,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Satr => "satr",
            Self::Ec => "ec",
            Self::EcTr => "ec_tr",
            Self::Es => "es",
        }
    }

    pub(crate) fn tag(self) -> u32 {
        match self {
            Self::Satr => 0,
            Self::Ec => 1,
            Self::EcTr => 2,
            Self::Es => 3,
        }
    }

    pub(crate) fn from_tag(tag: u32) -> Option<Self> {
        Some(match tag {
            0 => Self::Satr,
            1 => Self::Ec,
            2 => Self::EcTr,
            3 => Self::Es,
            _ => return None,
        })
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "satr" => Ok(Self::Satr),
            "ec" => Ok(Self::Ec),
            "ec_tr" | "ec-tr" => Ok(Self::EcTr),
            "es" => Ok(Self::Es),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

fn check(rho: &ProbVector, grad: &NaturalGradient) -> Result<()> {
    if rho.len() == grad.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: rho.len(),
            actual: grad.len(),
        })
    }
}

/// `delta_i = eta * sqrt(rho_i (1 - rho_i)) * g_i`.
pub fn satr_step(rho: &ProbVector, grad: &NaturalGradient, cfg: SatrConfig) -> Result<Vec<f64>> {
    check(rho, grad)?;
    Ok(rho
        .probs()
        .iter()
        .zip(&grad.g)
        .map(|(&p, &g)| cfg.eta * (p * (1.0 - p)).sqrt() * g)
        .collect())
}

/// Plain evolving-connectivity step `delta = eta * g`.
pub fn ec_step(rho: &ProbVector, grad: &NaturalGradient, eta: f64) -> Result<Vec<f64>> {
    check(rho, grad)?;
    Ok(grad.g.iter().map(|&g| eta * g).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrStep {
    pub delta: Vec<f64>,
    /// Set when the gradient was identically zero and no step was taken.
    pub no_signal: bool,
}

/// Fixed-budget trust-region step `sqrt(2 * budget) * g / norm(g)`.
pub fn ec_tr_step(rho: &ProbVector, grad: &NaturalGradient, cfg: TrConfig) -> Result<TrStep> {
    check(rho, grad)?;
    let d = rho.len();
    if grad.energy == 0.0 {
        return Ok(TrStep {
            delta: vec![0.0; d],
            no_signal: true,
        });
    }
    let quad: f64 = rho
        .probs()
        .iter()
        .zip(&grad.g)
        .map(|(&p, &g)| {
            let var = p * (1.0 - p);
            match cfg.normalization {
                TrNormalization::FisherMetric => g * g / var,
                TrNormalization::InverseFisher => g * g * var,
            }
        })
        .sum();
    let scale = (2.0 * cfg.budget(d)).sqrt() / quad.sqrt();
    Ok(TrStep {
        delta: grad.g.iter().map(|&g| scale * g).collect(),
        no_signal: false,
    })
}

/// `w + eta / (N sigma) * sum_n shaped_n eps_n - eta * weight_decay * w`.
pub fn es_step(
    weights: &[f64],
    perturbations: &[Vec<f64>],
    shaped: &[f64],
    cfg: EsConfig,
) -> Result<Vec<f64>> {
    if perturbations.len() != shaped.len() {
        return Err(Error::DimensionMismatch {
            expected: perturbations.len(),
            actual: shaped.len(),
        });
    }
    let mut direction = vec![0.0; weights.len()];
    for (eps, &s) in perturbations.iter().zip(shaped) {
        if eps.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                actual: eps.len(),
            });
        }
        for (acc, &e) in direction.iter_mut().zip(eps) {
            *acc += s * e;
        }
    }
    Ok(es_apply(weights, &direction, perturbations.len(), cfg))
}

/// Applies an already accumulated `sum_n shaped_n eps_n`.
pub fn es_apply(weights: &[f64], direction_sum: &[f64], pop: usize, cfg: EsConfig) -> Vec<f64> {
    let gain = cfg.eta / (pop.max(1) as f64 * cfg.sigma);
    weights
        .iter()
        .zip(direction_sum)
        .map(|(&w, &s)| w + gain * s - cfg.eta * cfg.weight_decay * w)
        .collect()
}

/// `clamp(rho + delta, rho.eps)`.
pub fn apply_update(rho: &ProbVector, delta: &[f64]) -> Result<ProbVector> {
    if rho.len() != delta.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.len(),
            actual: delta.len(),
        });
    }
    let raw: Vec<f64> = rho.probs().iter().zip(delta).map(|(p, d)| p + d).collect();
    clamp(&raw, rho.eps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernoulli::kl_quadratic;

    fn pv(p: &[f64]) -> ProbVector {
        ProbVector::new(p.to_vec(), 1e-3).unwrap()
    }

    fn ng(g: &[f64]) -> NaturalGradient {
        NaturalGradient::from_vec(g.to_vec(), 2)
    }

    #[test]
    fn satr_by_hand() {
        let rho = pv(&[0.5]);
        let g = ng(&[0.2]);
        let delta = satr_step(&rho, &g, SatrConfig { eta: 0.15 }).unwrap();
        assert!((delta[0] - 0.015).abs() < 1e-15);
        let kl = kl_quadratic(&rho, &delta).unwrap();
        assert!((kl - 4.5e-4).abs() < 1e-15);
        assert!((kl - 0.15f64.powi(2) / 2.0 * g.energy).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_zero_steps() {
        let rho = pv(&[0.3, 0.7]);
        let g = ng(&[0.0, 0.0]);
        assert_eq!(satr_step(&rho, &g, SatrConfig::default()).unwrap(), vec![0.0, 0.0]);
        assert_eq!(ec_step(&rho, &g, 0.15).unwrap(), vec![0.0, 0.0]);
        let tr = ec_tr_step(&rho, &g, TrConfig::default()).unwrap();
        assert!(tr.no_signal);
        assert_eq!(tr.delta, vec![0.0, 0.0]);
    }

    #[test]
    fn satr_shrinks_at_boundary() {
        let g = ng(&[0.2]);
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001, 1e-6] {
            let rho = ProbVector::new(vec![eps], eps.min(1e-3)).unwrap();
            let step = satr_step(&rho, &g, SatrConfig::default()).unwrap()[0];
            assert!(step > 0.0 && step < prev);
            prev = step;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn ec_by_hand_and_boundary_blowup() {
        for p in [0.5, 0.1, 0.9] {
            let d = ec_step(&pv(&[p]), &ng(&[0.2]), 0.15).unwrap();
            assert!((d[0] - 0.03).abs() < 1e-15);
        }
        let kls: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&p| {
                let rho = pv(&[p]);
                let step = ec_step(&rho, &ng(&[0.2]), 0.15).unwrap();
                kl_quadratic(&rho, &step).unwrap()
            })
            .collect();
        assert!(kls[0] < kls[1] && kls[1] < kls[2]);
        // closed form eta^2 g^2 / (2 eps (1 - eps))
        let expected = 0.15f64.powi(2) * 0.04 / (2.0 * 0.001 * 0.999);
        assert!((kls[2] - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn ec_tr_by_hand() {
        let rho = pv(&[0.5]);
        let cfg = TrConfig {
            delta_per_param: 0.02,
            normalization: TrNormalization::FisherMetric,
        };
        let step = ec_tr_step(&rho, &ng(&[0.3]), cfg).unwrap();
        assert!(!step.no_signal);
        assert!((step.delta[0] - 0.1).abs() < 1e-15);
        assert!((0.5 * 4.0 * step.delta[0].powi(2) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn ec_tr_scale_free() {
        let rho = pv(&[0.2, 0.6, 0.9]);
        let cfg = TrConfig::default();
        let a = ec_tr_step(&rho, &ng(&[0.1, -0.05, 0.3]), cfg).unwrap();
        let b = ec_tr_step(&rho, &ng(&[0.7, -0.35, 2.1]), cfg).unwrap();
        for (x, y) in a.delta.iter().zip(&b.delta) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn ec_tr_inverse_fisher_variant() {
        // d = 1, rho = 0.5: denominator sqrt(0.25 * 0.09) = 0.15, step = 0.2 * 0.3 / 0.15
        let rho = pv(&[0.5]);
        let cfg = TrConfig {
            delta_per_param: 0.02,
            normalization: TrNormalization::InverseFisher,
        };
        let step = ec_tr_step(&rho, &ng(&[0.3]), cfg).unwrap();
        assert!((step.delta[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn es_decay_only() {
        let w = vec![1.0, -2.0];
        let eps = vec![vec![0.3, 0.1], vec![-0.3, -0.1]];
        let cfg0 = EsConfig {
            weight_decay: 0.0,
            ..EsConfig::default()
        };
        assert_eq!(es_step(&w, &eps, &[0.0, 0.0], cfg0).unwrap(), w);
        let out = es_step(&w, &eps, &[0.0, 0.0], EsConfig::default()).unwrap();
        assert!((out[0] - 0.985).abs() < 1e-15);
        assert!((out[1] + 1.97).abs() < 1e-15);
    }

    #[test]
    fn es_direction() {
        let w = vec![0.0];
        let cfg = EsConfig {
            eta: 0.1,
            sigma: 0.5,
            weight_decay: 0.0,
            mirrored: false,
        };
        // (0.1 / (2 * 0.5)) * (0.5 * 1.0 + -0.5 * -1.0) = 0.1
        let out = es_step(&w, &[vec![1.0], vec![-1.0]], &[0.5, -0.5], cfg).unwrap();
        assert!((out[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn apply_update_cases() {
        assert_eq!(apply_update(&pv(&[0.999]), &[0.05]).unwrap().probs(), &[0.999]);
        assert_eq!(apply_update(&pv(&[0.5]), &[0.0]).unwrap().probs(), &[0.5]);
        assert_eq!(apply_update(&pv(&[0.5]), &[-0.015]).unwrap().probs(), &[0.485]);
        assert!(apply_update(&pv(&[0.5]), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn optimizer_names() {
        for k in [OptimizerKind::Satr, OptimizerKind::Ec, OptimizerKind::EcTr, OptimizerKind::Es] {
            assert_eq!(k.as_str().parse::<OptimizerKind>().unwrap(), k);
            assert_eq!(OptimizerKind::from_tag(k.tag()), Some(k));
        }
        assert!("adam".parse::<OptimizerKind>().is_err());
    }
}
