use crate::error::Result;
use crate::rng::RngStream;

use super::{argmax_lowest, AlgorithmKind, ArmStats, BanditPolicy};

/// Exp3.P: sample from `(1-γ) softmax(η G̃) + γ/L`, where `G̃` accumulates
/// importance-weighted rewards `r / p` of the pulled arm.
#[derive(Debug, Clone)]
pub struct Exp3P {
    stats: ArmStats,
    gamma: f64,
    eta: f64,
    gains: Vec<f64>,
    probs: Vec<f64>,
}

impl Exp3P {
    pub fn new(num_arms: usize, gamma: f64, eta: f64) -> Self {
        Exp3P {
            stats: ArmStats::new(num_arms),
            gamma,
            eta,
            gains: vec![0.0; num_arms],
            probs: vec![1.0 / num_arms as f64; num_arms],
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Importance-weighted cumulative gains.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    fn refresh(&mut self) {
        let l = self.gains.len() as f64;
        let top = self.gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, &g) in self.probs.iter_mut().zip(&self.gains) {
            *p = (self.eta * (g - top)).exp();
            total += *p;
        }
        for p in &mut self.probs {
            *p = (1.0 - self.gamma) * (*p / total) + self.gamma / l;
        }
    }
}

impl BanditPolicy for Exp3P {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Exp3P
    }

    fn stats(&self) -> &ArmStats {
        &self.stats
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return Ok(i);
                }
            }
        }
        // rounding left the cumulative sum just below u
        Ok(last)
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.stats.record(arm, reward);
        self.gains[arm] += reward / self.probs[arm];
        self.refresh();
    }

    fn recommend(&self) -> Result<usize> {
        Ok(argmax_lowest(&self.gains))
    }
}

/// UP-ADV: pull uniformly at random, recommend the largest observed total reward.
#[derive(Debug, Clone)]
pub struct UniformPull {
    stats: ArmStats,
    gains: Vec<f64>,
}

impl UniformPull {
    pub fn new(num_arms: usize) -> Self {
        UniformPull {
            stats: ArmStats::new(num_arms),
            gains: vec![0.0; num_arms],
        }
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
}

impl BanditPolicy for UniformPull {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::UpAdv
    }

    fn stats(&self) -> &ArmStats {
        &self.stats
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        Ok(rng.index(self.gains.len()))
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.stats.record(arm, reward);
        self.gains[arm] += reward;
    }

    fn recommend(&self) -> Result<usize> {
        Ok(argmax_lowest(&self.gains))
    }
}
