use crate::error::{BanditError, Result};
use crate::rng::RngStream;

use super::{AlgorithmKind, ArmStats, BanditPolicy};

/// One phase of the halving schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePlan {
    pub survivors: usize,
    pub pulls_per_arm: u64,
}

/// Sequential Halving for a fixed budget `T`.
///
/// There are `ceil(log2 L)` phases. In a phase with `S` survivors each is
/// pulled `floor(T / (S ceil(log2 L)))` times, round-robin, and the better
/// half (rounded up) by within-phase mean advances. Ties keep the lower index.
///
/// The schedule may use fewer than `T` pulls. Any remaining steps pull the
/// final survivor, so a run always lasts exactly `T` steps.
#[derive(Debug, Clone)]
pub struct SequentialHalving {
    stats: ArmStats,
    schedule: Vec<PhasePlan>,
    phase: usize,
    survivors: Vec<usize>,
    phase_sums: Vec<f64>,
    cursor: u64,
}

impl SequentialHalving {
    pub fn new(num_arms: usize, budget: u64) -> Result<Self> {
        let schedule = Self::plan(num_arms, budget)?;
        Ok(SequentialHalving {
            stats: ArmStats::new(num_arms),
            schedule,
            phase: 0,
            survivors: (0..num_arms).collect(),
            phase_sums: vec![0.0; num_arms],
            cursor: 0,
        })
    }

    /// Phase schedule for `num_arms` arms and budget `budget`.
    pub fn plan(num_arms: usize, budget: u64) -> Result<Vec<PhasePlan>> {
        if num_arms == 0 {
            return Err(BanditError::InvalidParameter("no arms".into()));
        }
        let rounds = (num_arms as u64).next_power_of_two().trailing_zeros() as u64;
        let mut plan = Vec::with_capacity(rounds as usize);
        let mut s = num_arms;
        for _ in 0..rounds {
            let n = budget / (s as u64 * rounds);
            if n == 0 {
                return Err(BanditError::BudgetTooSmall {
                    budget,
                    reason: format!(
                        "a phase with {s} survivors gets no pulls; need at least L*ceil(log2 L) = {}",
                        num_arms as u64 * rounds
                    ),
                });
            }
            plan.push(PhasePlan {
                survivors: s,
                pulls_per_arm: n,
            });
            s = s.div_ceil(2);
        }
        Ok(plan)
    }

    pub fn schedule(&self) -> &[PhasePlan] {
        &self.schedule
    }

    /// Total pulls consumed by the halving schedule.
    pub fn scheduled_pulls(&self) -> u64 {
        self.schedule
            .iter()
            .map(|p| p.survivors as u64 * p.pulls_per_arm)
            .sum()
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    pub fn is_finished(&self) -> bool {
        self.phase >= self.schedule.len()
    }

    fn close_phase(&mut self) {
        let sums = &self.phase_sums;
        // equal pull counts within a phase, so sums rank like means
        let mut ranked = self.survivors.clone();
        ranked.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));
        ranked.truncate(self.survivors.len().div_ceil(2));
        ranked.sort_unstable();
        self.survivors = ranked;
        self.phase_sums.iter_mut().for_each(|s| *s = 0.0);
        self.cursor = 0;
        self.phase += 1;
    }
}

impl BanditPolicy for SequentialHalving {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::SequentialHalving
    }

    fn stats(&self) -> &ArmStats {
        &self.stats
    }

    fn select_arm(&mut self, _rng: &mut RngStream) -> Result<usize> {
        if self.is_finished() {
            return Ok(self.survivors[0]);
        }
        Ok(self.survivors[(self.cursor % self.survivors.len() as u64) as usize])
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.stats.record(arm, reward);
        if self.is_finished() {
            return;
        }
        self.phase_sums[arm] += reward;
        self.cursor += 1;
        let plan = self.schedule[self.phase];
        if self.cursor == plan.survivors as u64 * plan.pulls_per_arm {
            self.close_phase();
        }
    }

    fn recommend(&self) -> Result<usize> {
        if !self.is_finished() {
            return Err(BanditError::Incomplete(format!(
                "halving is in phase {} of {}",
                self.phase + 1,
                self.schedule.len()
            )));
        }
        Ok(self.survivors[0])
    }
}
