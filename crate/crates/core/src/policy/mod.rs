//! Sequential bandit policies behind one select / update / recommend interface.
//!
//! | algorithm | selection | recommendation |
//! |-----------|-----------|----------------|
//! | BoBW-lil'UCB(γ) | argmax of mean + iterated-log radius | argmax empirical mean |
//! | UCB-E(a) | argmax of mean + `sqrt(a / N)` | argmax empirical mean |
//! | Sequential Halving | fixed phase schedule | last survivor |
//! | Exp3.P(γ, η) | sample from exponential weights mixed with uniform | argmax of importance-weighted gains |
//! | UP-ADV | uniform | argmax of observed gains |
//! | UCB_α | argmax of mean + `sqrt(α log t / 2N)`, stops on a confidence rule | argmax empirical mean |
//!
//! Selection ties are broken uniformly at random from the policy stream;
//! recommendation ties go to the lowest index.

mod exp3p;
mod halving;
mod index;
mod ucb_alpha;

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::rng::RngStream;

pub use exp3p::{Exp3P, UniformPull};
pub use halving::{PhasePlan, SequentialHalving};
pub use index::{
    lil_radius, ConfidenceRadius, ExplorationRadius, IndexPolicy, LilRadius,
};
pub use ucb_alpha::UcbAlpha;

/// Pull counts and running means shared by every policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    t: u64,
    pulls: Vec<u64>,
    means: Vec<f64>,
}

impl ArmStats {
    pub fn new(num_arms: usize) -> Self {
        ArmStats {
            t: 0,
            pulls: vec![0; num_arms],
            means: vec![0.0; num_arms],
        }
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.t += 1;
        let n = &mut self.pulls[arm];
        *n += 1;
        self.means[arm] += (reward - self.means[arm]) / *n as f64;
    }

    /// Number of completed steps.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    fn all_pulled(&self) -> bool {
        self.pulls.iter().all(|&n| n > 0)
    }

    fn best_mean_arm(&self) -> Result<usize> {
        if !self.all_pulled() {
            return Err(BanditError::Incomplete("some arm has never been pulled".into()));
        }
        Ok(argmax_lowest(&self.means))
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let top = max_value(values);
    values.iter().position(|&v| v == top).unwrap_or(0)
}

/// Largest value, with four independent lanes so the loop vectorises.
fn max_value(values: &[f64]) -> f64 {
    let mut lanes = [f64::NEG_INFINITY; 4];
    let chunks = values.chunks_exact(4);
    let tail = chunks.remainder();
    for c in chunks {
        for k in 0..4 {
            lanes[k] = if c[k] > lanes[k] { c[k] } else { lanes[k] };
        }
    }
    let mut top = lanes[0].max(lanes[1]).max(lanes[2].max(lanes[3]));
    for &v in tail {
        if v > top {
            top = v;
        }
    }
    top
}

fn count_equal(values: &[f64], target: f64) -> usize {
    let mut lanes = [0usize; 4];
    let chunks = values.chunks_exact(4);
    let tail = chunks.remainder();
    for c in chunks {
        for k in 0..4 {
            lanes[k] += usize::from(c[k] == target);
        }
    }
    lanes.iter().sum::<usize>() + tail.iter().filter(|&&v| v == target).count()
}

/// Index of the largest value; ties are broken uniformly at random.
///
/// The stream is consumed only when the maximum is tied.
pub fn argmax_random_ties(values: &[f64], rng: &mut RngStream) -> usize {
    let top = max_value(values);
    let ties = count_equal(values, top);
    if ties <= 1 {
        return values.iter().position(|&v| v == top).unwrap_or(0);
    }
    let pick = rng.index(ties);
    values
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v == top)
        .nth(pick)
        .map_or(0, |(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Bobw,
    UcbE,
    SequentialHalving,
    Exp3P,
    UpAdv,
    UcbAlpha,
}

impl AlgorithmKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmKind::Bobw => "bobw",
            AlgorithmKind::UcbE => "ucb_e",
            AlgorithmKind::SequentialHalving => "sequential_halving",
            AlgorithmKind::Exp3P => "exp3p",
            AlgorithmKind::UpAdv => "up_adv",
            AlgorithmKind::UcbAlpha => "ucb_alpha",
        }
    }
}

/// Parameters of one policy configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum PolicyParams {
    /// `sigma: None` takes the instance's sub-Gaussian scale at run time.
    Bobw {
        #[serde(default)]
        sigma: Option<f64>,
        epsilon: f64,
        beta: f64,
        gamma: f64,
    },
    UcbE {
        a: f64,
    },
    SequentialHalving,
    Exp3P {
        gamma: f64,
        eta: f64,
    },
    UpAdv,
    UcbAlpha {
        alpha: f64,
        delta: f64,
    },
}

impl PolicyParams {
    /// BoBW with the experiment defaults `epsilon = 0.01`, `beta = e`.
    pub fn bobw(gamma: f64) -> Self {
        PolicyParams::Bobw {
            sigma: None,
            epsilon: 0.01,
            beta: std::f64::consts::E,
            gamma,
        }
    }

    pub fn kind(&self) -> AlgorithmKind {
        match self {
            PolicyParams::Bobw { .. } => AlgorithmKind::Bobw,
            PolicyParams::UcbE { .. } => AlgorithmKind::UcbE,
            PolicyParams::SequentialHalving => AlgorithmKind::SequentialHalving,
            PolicyParams::Exp3P { .. } => AlgorithmKind::Exp3P,
            PolicyParams::UpAdv => AlgorithmKind::UpAdv,
            PolicyParams::UcbAlpha { .. } => AlgorithmKind::UcbAlpha,
        }
    }

    /// Policies that decide on their own when to stop.
    pub fn is_fixed_confidence(&self) -> bool {
        matches!(self, PolicyParams::UcbAlpha { .. })
    }

    /// Fills a missing BoBW scale with `sigma`.
    pub fn resolved(self, sigma: f64) -> Self {
        match self {
            PolicyParams::Bobw {
                sigma: None,
                epsilon,
                beta,
                gamma,
            } => PolicyParams::Bobw {
                sigma: Some(sigma),
                epsilon,
                beta,
                gamma,
            },
            other => other,
        }
    }

    /// Checks the parameter ranges. Returns warnings for values that are
    /// admissible but outside the range the BoBW guarantees cover.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |msg: String| Err(BanditError::InvalidParameter(msg));
        let mut warnings = Vec::new();
        match *self {
            PolicyParams::Bobw {
                sigma,
                epsilon,
                beta,
                gamma,
            } => {
                if let Some(s) = sigma {
                    if !(s.is_finite() && s > 0.0) {
                        return bad(format!("sigma = {s} must be positive"));
                    }
                }
                if !(epsilon > 0.0 && epsilon < 1.0) {
                    return bad(format!("epsilon = {epsilon} must lie in (0, 1)"));
                }
                if !(beta.is_finite() && beta >= 0.0) {
                    return bad(format!("beta = {beta} must be non-negative"));
                }
                if !(gamma > 0.0 && gamma < 1.0) {
                    return bad(format!("gamma = {gamma} must lie in (0, 1)"));
                }
                let limit = bobw_gamma_limit(epsilon, beta);
                if gamma >= limit {
                    warnings.push(format!(
                        "gamma = {gamma} is not below min(log(beta + 1 + eps)/e, 1) = {limit}; \
                         the regret and failure guarantees do not cover this value"
                    ));
                }
            }
            PolicyParams::UcbE { a } => {
                if !(a.is_finite() && a > 0.0) {
                    return bad(format!("a = {a} must be positive"));
                }
            }
            PolicyParams::SequentialHalving | PolicyParams::UpAdv => {}
            PolicyParams::Exp3P { gamma, eta } => {
                if !(0.0..=1.0).contains(&gamma) {
                    return bad(format!("gamma = {gamma} must lie in [0, 1]"));
                }
                if !(eta.is_finite() && eta > 0.0) {
                    return bad(format!("eta = {eta} must be positive"));
                }
            }
            PolicyParams::UcbAlpha { alpha, delta } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return bad(format!("alpha = {alpha} must be positive"));
                }
                if !(delta > 0.0 && delta < 1.0) {
                    return bad(format!("delta = {delta} must lie in (0, 1)"));
                }
            }
        }
        Ok(warnings)
    }

    /// Short display label such as `BoBW(0.9)` or `UCB_3`.
    pub fn label(&self) -> String {
        match *self {
            PolicyParams::Bobw { gamma, .. } => format!("BoBW({gamma:e})"),
            PolicyParams::UcbE { a } => format!("UCB-E({a})"),
            PolicyParams::SequentialHalving => "SH".into(),
            PolicyParams::Exp3P { gamma, eta } => format!("Exp3.P({gamma},{eta})"),
            PolicyParams::UpAdv => "UP-ADV".into(),
            PolicyParams::UcbAlpha { alpha, delta } => format!("UCB_{alpha}(delta={delta})"),
        }
    }
}

/// Upper end of the admissible BoBW γ range: `min(log(β + 1 + ε) / e, 1)`.
pub fn bobw_gamma_limit(epsilon: f64, beta: f64) -> f64 {
    ((beta + 1.0 + epsilon).ln() / std::f64::consts::E).min(1.0)
}

/// The common interface of all policies.
pub trait BanditPolicy {
    fn kind(&self) -> AlgorithmKind;

    fn stats(&self) -> &ArmStats;

    /// Arm to pull at the next step.
    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize>;

    /// Feeds back the reward of the arm pulled at the current step.
    ///
    /// # Panics
    /// If `arm` is out of range.
    fn update(&mut self, arm: usize, reward: f64);

    fn recommend(&self) -> Result<usize>;

    /// Only fixed-confidence policies ever stop.
    fn has_stopped(&self) -> bool {
        false
    }
}

/// Runtime state of any policy.
#[derive(Debug, Clone)]
pub enum PolicyState {
    Bobw(IndexPolicy<LilRadius>),
    UcbE(IndexPolicy<ExplorationRadius>),
    SequentialHalving(SequentialHalving),
    Exp3P(Exp3P),
    UpAdv(UniformPull),
    UcbAlpha(UcbAlpha),
}

/// Creates a fresh policy for `num_arms` arms and a budget (or step cap) of `horizon`.
///
/// Range warnings from [`PolicyParams::validate`] are not logged here, since
/// this runs once per trial.
///
/// A BoBW configuration without an explicit `sigma` is rejected here; call
/// [`PolicyParams::resolved`] first.
pub fn policy_init(params: &PolicyParams, num_arms: usize, horizon: u64) -> Result<PolicyState> {
    if num_arms == 0 {
        return Err(BanditError::InvalidParameter("a policy needs at least one arm".into()));
    }
    params.validate()?;
    Ok(match *params {
        PolicyParams::Bobw {
            sigma,
            epsilon,
            beta,
            gamma,
        } => {
            let sigma = sigma.ok_or_else(|| {
                BanditError::InvalidParameter("BoBW sigma unresolved; call PolicyParams::resolved".into())
            })?;
            PolicyState::Bobw(IndexPolicy::new(
                num_arms,
                LilRadius::new(sigma, epsilon, beta, gamma),
            ))
        }
        PolicyParams::UcbE { a } => {
            PolicyState::UcbE(IndexPolicy::new(num_arms, ExplorationRadius::new(a)))
        }
        PolicyParams::SequentialHalving => {
            PolicyState::SequentialHalving(SequentialHalving::new(num_arms, horizon)?)
        }
        PolicyParams::Exp3P { gamma, eta } => PolicyState::Exp3P(Exp3P::new(num_arms, gamma, eta)),
        PolicyParams::UpAdv => PolicyState::UpAdv(UniformPull::new(num_arms)),
        PolicyParams::UcbAlpha { alpha, delta } => {
            PolicyState::UcbAlpha(UcbAlpha::new(num_arms, alpha, delta))
        }
    })
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            PolicyState::Bobw($p) => $e,
            PolicyState::UcbE($p) => $e,
            PolicyState::SequentialHalving($p) => $e,
            PolicyState::Exp3P($p) => $e,
            PolicyState::UpAdv($p) => $e,
            PolicyState::UcbAlpha($p) => $e,
        }
    };
}

impl BanditPolicy for PolicyState {
    fn kind(&self) -> AlgorithmKind {
        delegate!(self, p => p.kind())
    }

    fn stats(&self) -> &ArmStats {
        delegate!(self, p => p.stats())
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> Result<usize> {
        delegate!(self, p => p.select_arm(rng))
    }

    fn update(&mut self, arm: usize, reward: f64) {
        delegate!(self, p => p.update(arm, reward))
    }

    fn recommend(&self) -> Result<usize> {
        delegate!(self, p => p.recommend())
    }

    fn has_stopped(&self) -> bool {
        delegate!(self, p => p.has_stopped())
    }
}
