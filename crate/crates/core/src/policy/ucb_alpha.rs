use crate::error::{BanditError, Result};
use crate::rng::RngStream;

use super::{argmax_random_ties, AlgorithmKind, ArmStats, BanditPolicy};

/// Fixed-confidence UCB with index `mean + sqrt(α log t / (2N))`.
///
/// After every arm has been pulled it stops once the empirical best arm's
/// lower bound `mean_b - sqrt(log(2 L t² / δ) / (2 N_b))` clears every other
/// arm's upper bound built the same way.
///
/// The threshold grows like `2 log t` while a suboptimal arm's pull count
/// grows like `α log t / (2Δ²)`, so the rule can only fire for `α > 2`.
#[derive(Debug, Clone)]
pub struct UcbAlpha {
    stats: ArmStats,
    alpha: f64,
    stopped: bool,
    inv_sqrt_2n: Vec<f64>,
    scratch: Vec<f64>,
    /// Empirical best arm, lowest index on ties.
    leader: usize,
    warmed_up: bool,
    /// `log t` for the current step count, shared by selection and stopping.
    log_t: f64,
    log_2l_over_delta: f64,
}

impl UcbAlpha {
    pub fn new(num_arms: usize, alpha: f64, delta: f64) -> Self {
        UcbAlpha {
            stats: ArmStats::new(num_arms),
            alpha,
            stopped: false,
            inv_sqrt_2n: vec![f64::INFINITY; num_arms],
            scratch: vec![0.0; num_arms],
            leader: 0,
            warmed_up: false,
            log_t: f64::NEG_INFINITY,
            log_2l_over_delta: (2.0 * num_arms as f64 / delta).ln(),
        }
    }

    fn track_leader(&mut self, arm: usize, previous_mean: f64) {
        let means = self.stats.means();
        let (m, lead) = (means[arm], means[self.leader]);
        if arm == self.leader {
            if m < previous_mean {
                // the leader may have dropped below another arm
                self.leader = super::argmax_lowest(means);
            }
        } else if m > lead || (m == lead && arm < self.leader) {
            self.leader = arm;
        }
    }

    fn check_stop(&mut self) {
        let l = self.stats.num_arms();
        if !self.warmed_up {
            self.warmed_up = self.stats.all_pulled();
            if !self.warmed_up {
                return;
            }
        }
        if l == 1 {
            self.stopped = true;
            return;
        }
        let root = (self.log_2l_over_delta + 2.0 * self.log_t).sqrt();
        let means = self.stats.means();
        let b = self.leader;
        let lcb = means[b] - root * self.inv_sqrt_2n[b];
        self.stopped = (0..l)
            .filter(|&j| j != b)
            .all(|j| means[j] + root * self.inv_sqrt_2n[j] <= lcb);
    }
}

impl BanditPolicy for UcbAlpha {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::UcbAlpha
    }

    fn stats(&self) -> &ArmStats {
        &self.stats
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        if self.stopped {
            return Err(BanditError::Stopped);
        }
        let t = self.stats.t() as usize;
        if t < self.stats.num_arms() {
            return Ok(t);
        }
        let scale = (self.alpha * self.log_t).sqrt();
        let means = self.stats.means();
        let n = self.scratch.len();
        let (out, w) = (&mut self.scratch[..n], &self.inv_sqrt_2n[..n]);
        let means = &means[..n];
        for i in 0..n {
            out[i] = means[i] + scale * w[i];
        }
        Ok(argmax_random_ties(&self.scratch, rng))
    }

    fn update(&mut self, arm: usize, reward: f64) {
        let previous_mean = self.stats.means()[arm];
        self.stats.record(arm, reward);
        self.inv_sqrt_2n[arm] = (0.5 / self.stats.pulls()[arm] as f64).sqrt();
        self.log_t = (self.stats.t() as f64).ln();
        self.track_leader(arm, previous_mean);
        self.check_stop();
    }

    fn recommend(&self) -> Result<usize> {
        self.stats.best_mean_arm()
    }

    fn has_stopped(&self) -> bool {
        self.stopped
    }
}
