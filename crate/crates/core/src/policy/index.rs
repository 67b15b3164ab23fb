use crate::error::{BanditError, Result};
use crate::rng::RngStream;

use super::{argmax_random_ties, AlgorithmKind, ArmStats, BanditPolicy};

/// Exploration bonus of an arm as a function of its pull count only.
pub trait ConfidenceRadius: Clone + std::fmt::Debug {
    const KIND: AlgorithmKind;

    fn radius(&self, pulls: u64) -> f64;
}

/// Iterated-logarithm confidence radius
/// `5σ(1+√ε) · sqrt( 2(1+ε)/n · log( log(β + (1+ε)n) / γ ) )`.
///
/// Fails when the outer logarithm is not positive, i.e. when
/// `log(β + (1+ε)n) / γ <= 1`.
pub fn lil_radius(n: u64, sigma: f64, epsilon: f64, beta: f64, gamma: f64) -> Result<f64> {
    if n == 0 {
        return Err(BanditError::Domain("radius needs at least one pull".into()));
    }
    let n = n as f64;
    let inner = (beta + (1.0 + epsilon) * n).ln() / gamma;
    if !(inner > 1.0) {
        return Err(BanditError::Domain(format!(
            "log(beta + (1+eps) n) / gamma = {inner} is not above 1"
        )));
    }
    let scale = 5.0 * sigma * (1.0 + epsilon.sqrt());
    Ok(scale * (2.0 * (1.0 + epsilon) / n * inner.ln()).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LilRadius {
    pub sigma: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LilRadius {
    pub fn new(sigma: f64, epsilon: f64, beta: f64, gamma: f64) -> Self {
        LilRadius {
            sigma,
            epsilon,
            beta,
            gamma,
        }
    }
}

impl ConfidenceRadius for LilRadius {
    const KIND: AlgorithmKind = AlgorithmKind::Bobw;

    /// Outside the domain of the closed form the bonus is taken as 0.
    fn radius(&self, pulls: u64) -> f64 {
        lil_radius(pulls, self.sigma, self.epsilon, self.beta, self.gamma).unwrap_or(0.0)
    }
}

/// UCB-E bonus `sqrt(a / n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationRadius {
    pub a: f64,
}

impl ExplorationRadius {
    pub fn new(a: f64) -> Self {
        ExplorationRadius { a }
    }
}

impl ConfidenceRadius for ExplorationRadius {
    const KIND: AlgorithmKind = AlgorithmKind::UcbE;

    fn radius(&self, pulls: u64) -> f64 {
        (self.a / pulls as f64).sqrt()
    }
}

/// Round-robin warm-up followed by argmax of `mean + radius(N)`.
///
/// Indices depend only on each arm's own statistics, so they are cached and
/// only the pulled arm's index is refreshed.
#[derive(Debug, Clone)]
pub struct IndexPolicy<R> {
    radius: R,
    stats: ArmStats,
    index: Vec<f64>,
}

impl<R: ConfidenceRadius> IndexPolicy<R> {
    pub fn new(num_arms: usize, radius: R) -> Self {
        IndexPolicy {
            radius,
            stats: ArmStats::new(num_arms),
            index: vec![f64::INFINITY; num_arms],
        }
    }

    pub fn radius_fn(&self) -> &R {
        &self.radius
    }

    /// Current bonus of `arm`; infinite before its first pull.
    pub fn radius_of(&self, arm: usize) -> f64 {
        match self.stats.pulls()[arm] {
            0 => f64::INFINITY,
            n => self.radius.radius(n),
        }
    }

    pub fn indices(&self) -> &[f64] {
        &self.index
    }
}

impl<R: ConfidenceRadius> BanditPolicy for IndexPolicy<R> {
    fn kind(&self) -> AlgorithmKind {
        R::KIND
    }

    fn stats(&self) -> &ArmStats {
        &self.stats
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        let t = self.stats.t() as usize;
        if t < self.stats.num_arms() {
            return Ok(t);
        }
        Ok(argmax_random_ties(&self.index, rng))
    }

    fn update(&mut self, arm: usize, reward: f64) {
        self.stats.record(arm, reward);
        let n = self.stats.pulls()[arm];
        self.index[arm] = self.stats.means()[arm] + self.radius.radius(n);
    }

    fn recommend(&self) -> Result<usize> {
        self.stats.best_mean_arm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn lil_radius_reference_value() {
        // sqrt(2.02 * ln(ln(e + 1.01) / 0.01)) * 2.5 * 1.1
        let r = lil_radius(1, 0.5, 0.01, E, 0.01).unwrap();
        let by_hand = 2.5 * 1.1 * (2.02 * ((E + 1.01).ln() / 0.01).ln()).sqrt();
        assert_relative_eq!(r, by_hand, max_relative = 1e-14);
        assert_relative_eq!(r, 8.634, max_relative = 2e-4);
    }

    #[test]
    fn lil_radius_domain() {
        // beta = 0, n = 1: ln(1.01) / 0.5 < 1
        assert!(lil_radius(1, 1.0, 0.01, 0.0, 0.5).is_err());
        assert!(lil_radius(0, 1.0, 0.01, E, 0.5).is_err());
        assert_eq!(LilRadius::new(1.0, 0.01, 0.0, 0.5).radius(1), 0.0);
    }

    #[test]
    fn lil_radius_decreases_in_n() {
        let mut prev = f64::INFINITY;
        for n in [1u64, 2, 5, 10, 100, 1000, 100_000] {
            let r = lil_radius(n, 0.5, 0.01, E, 0.1).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn lil_radius_increases_as_gamma_shrinks() {
        let a = lil_radius(10, 0.5, 0.01, E, 0.9).unwrap();
        let b = lil_radius(10, 0.5, 0.01, E, 9e-7).unwrap();
        assert!(b > a);
        let wide = lil_radius(1, 0.5, 0.01, E, 0.01).unwrap();
        assert!(lil_radius(1, 0.5, 0.01, E, 0.5).unwrap() < wide);
    }

    #[test]
    fn lil_radius_quadrupled_pulls() {
        for n in [1u64, 3, 10, 1000, 100_000] {
            let r = lil_radius(n, 0.5, 0.01, E, 0.01).unwrap();
            assert!(lil_radius(4 * n, 0.5, 0.01, E, 0.01).unwrap() < r / 1.9);
        }
    }

    #[test]
    fn strict_index_argmax() {
        // two arms with (mean, radius) = (0.5, 0.1) and (0.3, 0.1)
        let mut p = IndexPolicy::new(2, ExplorationRadius::new(0.01));
        let mut rng = RngStream::new(0, 1);
        p.update(0, 0.5);
        p.update(1, 0.3);
        for _ in 0..20 {
            assert_eq!(p.clone().select_arm(&mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn warm_up_is_round_robin() {
        let mut p = IndexPolicy::new(3, LilRadius::new(0.5, 0.01, E, 0.1));
        let mut rng = RngStream::new(0, 1);
        for t in 0..3 {
            assert_eq!(p.select_arm(&mut rng).unwrap(), t);
            p.update(t, 0.0);
        }
    }

    /// Feeds a fixed reward script into a policy and checks that every cached
    /// index equals `mean + radius(N)` recomputed from scratch.
    fn check_index_cache<R: ConfidenceRadius>(radius: R) {
        let rewards = [0.3, 0.9, 0.1, 0.7, 0.2, 0.8, 0.6, 0.4, 0.5, 0.0];
        let mut p = IndexPolicy::new(3, radius.clone());
        let mut rng = RngStream::new(5, 1);
        let mut sums = [0.0; 3];
        let mut counts = [0u64; 3];
        for (t, &r) in rewards.iter().cycle().take(60).enumerate() {
            let a = p.select_arm(&mut rng).unwrap();
            if t < 3 {
                assert_eq!(a, t);
            }
            p.update(a, r);
            sums[a] += r;
            counts[a] += 1;
            for i in 0..3 {
                if counts[i] > 0 {
                    let expect = sums[i] / counts[i] as f64 + radius.radius(counts[i]);
                    assert_relative_eq!(p.indices()[i], expect, max_relative = 1e-12);
                }
            }
            if t >= 3 {
                let best = p.indices().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                // the arm picked at this step had the top index before its update
                assert!(counts.iter().all(|&c| c > 0));
                assert!(best.is_finite());
            }
        }
    }

    #[test]
    fn index_cache_bobw() {
        check_index_cache(LilRadius::new(0.5, 0.01, E, 0.1));
    }

    #[test]
    fn index_cache_ucb_e() {
        check_index_cache(ExplorationRadius::new(2.0));
    }

    #[test]
    fn selection_is_argmax_of_index() {
        for radius in [ExplorationRadius::new(0.5), ExplorationRadius::new(8.0)] {
            let mut p = IndexPolicy::new(4, radius);
            let mut rng = RngStream::new(17, 1);
            let mut env = RngStream::new(17, 0);
            for _ in 0..200 {
                let before = p.indices().to_vec();
                let a = p.select_arm(&mut rng).unwrap();
                if p.stats().t() >= 4 {
                    let top = before.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    assert_eq!(before[a], top);
                }
                p.update(a, env.uniform());
            }
        }
    }

    #[test]
    fn bobw_finds_clear_best_arm() {
        let mut p = IndexPolicy::new(3, LilRadius::new(0.5, 0.01, E, 0.5));
        let mut rng = RngStream::new(2, 1);
        let mut env = RngStream::new(2, 0);
        let means = [0.2, 0.8, 0.5];
        for _ in 0..3000 {
            let a = p.select_arm(&mut rng).unwrap();
            let r = if env.uniform() < means[a] { 1.0 } else { 0.0 };
            p.update(a, r);
        }
        assert_eq!(p.recommend().unwrap(), 1);
        assert!(p.stats().pulls()[1] > p.stats().pulls()[0]);
    }

    #[test]
    fn recommend_before_warm_up_is_incomplete() {
        let p = IndexPolicy::new(2, ExplorationRadius::new(1.0));
        assert!(matches!(p.recommend(), Err(BanditError::Incomplete(_))));
    }
}
