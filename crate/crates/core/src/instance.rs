//! Stochastic instances, reward sampling and gap/hardness arithmetic.

use std::fs;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::rng::RngStream;

/// Reward model of a single arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ArmModel {
    /// Takes value `scale` with probability `p`, otherwise 0.
    Bernoulli { p: f64, scale: f64 },
    Gaussian { mean: f64, variance: f64 },
    /// Unit-variance Gaussian centred at a log-transformed quantity.
    LogDomainGaussian { log_mean: f64 },
}

impl ArmModel {
    pub fn bernoulli(p: f64) -> Self {
        ArmModel::Bernoulli { p, scale: 1.0 }
    }

    pub fn gaussian(mean: f64, variance: f64) -> Self {
        ArmModel::Gaussian { mean, variance }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ArmModel::Bernoulli { p, scale } => p * scale,
            ArmModel::Gaussian { mean, .. } => mean,
            ArmModel::LogDomainGaussian { log_mean } => log_mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ArmModel::Bernoulli { p, scale } => scale * scale * p * (1.0 - p),
            ArmModel::Gaussian { variance, .. } => variance,
            ArmModel::LogDomainGaussian { .. } => 1.0,
        }
    }

    /// Sub-Gaussian scale implied by the family: half the range for
    /// two-point rewards, the standard deviation for Gaussians.
    pub fn sub_gaussian_scale(&self) -> f64 {
        match *self {
            ArmModel::Bernoulli { scale, .. } => scale.abs() / 2.0,
            ArmModel::Gaussian { variance, .. } => variance.sqrt(),
            ArmModel::LogDomainGaussian { .. } => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ArmModel::Bernoulli { p, scale } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(BanditError::InvalidInstance(format!(
                        "Bernoulli parameter {p} outside [0, 1]"
                    )));
                }
                if !scale.is_finite() || scale <= 0.0 {
                    return Err(BanditError::InvalidInstance(format!(
                        "Bernoulli reward scale {scale} must be positive"
                    )));
                }
            }
            ArmModel::Gaussian { mean, variance } => {
                if !mean.is_finite() {
                    return Err(BanditError::InvalidInstance(format!(
                        "Gaussian mean {mean} is not finite"
                    )));
                }
                if !variance.is_finite() || variance < 0.0 {
                    return Err(BanditError::InvalidInstance(format!(
                        "Gaussian variance {variance} must be finite and non-negative"
                    )));
                }
            }
            ArmModel::LogDomainGaussian { log_mean } => {
                if !log_mean.is_finite() {
                    return Err(BanditError::InvalidInstance(format!(
                        "log-domain mean {log_mean} is not finite"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ArmModel::Bernoulli { p, scale } => {
                if rng.uniform() < p {
                    scale
                } else {
                    0.0
                }
            }
            ArmModel::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            ArmModel::LogDomainGaussian { log_mean } => {
                let z: f64 = StandardNormal.sample(rng);
                log_mean + z
            }
        }
    }

    fn family(&self) -> Family {
        match self {
            ArmModel::Bernoulli { .. } => Family::Bernoulli,
            ArmModel::Gaussian { .. } => Family::Gaussian,
            ArmModel::LogDomainGaussian { .. } => Family::LogGaussian,
        }
    }
}

/// An ordered set of arms with a common sub-Gaussian scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticInstance {
    pub label: String,
    arms: Vec<ArmModel>,
    sub_gaussian_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arm_names: Option<Vec<String>>,
}

impl StochasticInstance {
    /// Builds an instance whose scale follows [`default_scale`].
    pub fn new(label: impl Into<String>, arms: Vec<ArmModel>) -> Result<Self> {
        let sigma = scale_of(&arms);
        if sigma <= 0.0 {
            return Err(BanditError::InvalidInstance(
                "all arms are deterministic; supply an explicit sub-Gaussian scale".into(),
            ));
        }
        Self::with_scale(label, arms, sigma)
    }

    pub fn with_scale(
        label: impl Into<String>,
        arms: Vec<ArmModel>,
        sub_gaussian_scale: f64,
    ) -> Result<Self> {
        if arms.is_empty() {
            return Err(BanditError::InvalidInstance("an instance needs at least one arm".into()));
        }
        for arm in &arms {
            arm.validate()?;
        }
        if !sub_gaussian_scale.is_finite() || sub_gaussian_scale <= 0.0 {
            return Err(BanditError::InvalidInstance(format!(
                "sub-Gaussian scale {sub_gaussian_scale} must be positive"
            )));
        }
        Ok(StochasticInstance {
            label: label.into(),
            arms,
            sub_gaussian_scale,
            arm_names: None,
        })
    }

    /// `w_1 = 0.5` and every other arm at `0.5 - delta`, Bernoulli rewards.
    pub fn synthetic_bernoulli(num_arms: usize, delta: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(BanditError::InvalidInstance("an instance needs at least one arm".into()));
        }
        let mut arms = vec![ArmModel::bernoulli(0.5)];
        arms.extend(std::iter::repeat_n(ArmModel::bernoulli(0.5 - delta), num_arms - 1));
        Self::new(format!("bern:L={num_arms},delta={delta}"), arms)
    }

    pub fn with_arm_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.arms.len() {
            return Err(BanditError::InvalidInstance(format!(
                "{} arm names for {} arms",
                names.len(),
                self.arms.len()
            )));
        }
        self.arm_names = Some(names);
        Ok(self)
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn arm_names(&self) -> Option<&[String]> {
        self.arm_names.as_deref()
    }

    pub fn sub_gaussian_scale(&self) -> f64 {
        self.sub_gaussian_scale
    }

    pub fn set_sub_gaussian_scale(&mut self, sigma: f64) -> Result<()> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(BanditError::InvalidInstance(format!(
                "sub-Gaussian scale {sigma} must be positive"
            )));
        }
        self.sub_gaussian_scale = sigma;
        Ok(())
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmModel::mean).collect()
    }
}

fn scale_of(arms: &[ArmModel]) -> f64 {
    arms.iter()
        .map(ArmModel::sub_gaussian_scale)
        .fold(0.0, f64::max)
}

/// The family-derived sub-Gaussian scale: `b/2` for two-point rewards in
/// `{0, b}`, the largest standard deviation for Gaussian arms, and the
/// maximum over families for mixed instances.
pub fn default_scale(instance: &StochasticInstance) -> f64 {
    scale_of(&instance.arms)
}

pub fn sample_reward(instance: &StochasticInstance, arm: usize, rng: &mut RngStream) -> Result<f64> {
    let model = instance.arms.get(arm).ok_or(BanditError::ArmOutOfRange {
        arm,
        num_arms: instance.num_arms(),
    })?;
    Ok(model.sample(rng))
}

/// Optimality gaps of an instance with a unique best arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub optimal_arm: usize,
    /// `w_opt - w_i` per arm; zero at the optimal arm.
    pub gaps: Vec<f64>,
    /// Smallest nonzero gap. Infinite for single-arm instances.
    pub min_gap: f64,
    /// Set when some gap exceeds 1. Nothing is rescaled and nothing is
    /// logged here; callers decide whether to warn.
    pub unit_gap_violated: bool,
}

impl GapProfile {
    pub fn from_means(means: &[f64]) -> Result<Self> {
        if means.is_empty() {
            return Err(BanditError::InvalidInstance("no arms".into()));
        }
        let mut best = 0;
        for (i, &m) in means.iter().enumerate().skip(1) {
            if m > means[best] {
                best = i;
            }
        }
        if let Some(tie) = means
            .iter()
            .enumerate()
            .position(|(i, &m)| i != best && m == means[best])
        {
            let (first, second) = if tie < best { (tie, best) } else { (best, tie) };
            return Err(BanditError::NonUniqueOptimum {
                mean: means[best],
                first,
                second,
            });
        }
        let top = means[best];
        let gaps: Vec<f64> = means.iter().map(|&m| top - m).collect();
        let min_gap = gaps
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, &g)| g)
            .fold(f64::INFINITY, f64::min);
        let unit_gap_violated = gaps.iter().any(|&g| g > 1.0);
        Ok(GapProfile {
            optimal_arm: best,
            gaps,
            min_gap,
            unit_gap_violated,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.gaps.len()
    }

    /// Gaps of the suboptimal arms, in arm order.
    pub fn suboptimal_gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.gaps
            .iter()
            .enumerate()
            .filter(move |&(i, _)| i != self.optimal_arm)
            .map(|(_, &g)| g)
    }

    /// Suboptimal gaps sorted increasingly, i.e. in order of non-increasing
    /// mean; position `k` holds the arm of rank `k + 2`.
    pub fn ranked_gaps(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.suboptimal_gaps().collect();
        g.sort_by(f64::total_cmp);
        g
    }
}

pub fn gap_profile(instance: &StochasticInstance) -> Result<GapProfile> {
    GapProfile::from_means(&instance.means())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hardness {
    pub h1: f64,
    pub h2: f64,
    /// `max_{i >= 2} i^p / gap_i^2` over ranks of the sorted instance.
    pub hp_prime: Option<f64>,
    /// `2^{-p} + sum_{r=2}^{L} r^{-p}`.
    pub cp: Option<f64>,
    pub p: Option<f64>,
}

pub fn hardness(profile: &GapProfile, p: Option<f64>) -> Result<Hardness> {
    let h1 = profile.suboptimal_gaps().map(|g| 1.0 / g).sum();
    let h2 = profile.suboptimal_gaps().map(|g| 1.0 / (g * g)).sum();
    let (hp_prime, cp) = match p {
        None => (None, None),
        Some(p) => {
            if !(p > 0.0) || !p.is_finite() {
                return Err(BanditError::InvalidParameter(format!("p = {p} must be positive")));
            }
            let hp = profile
                .ranked_gaps()
                .iter()
                .enumerate()
                .map(|(k, &g)| ((k + 2) as f64).powf(p) / (g * g))
                .fold(0.0, f64::max);
            let l = profile.num_arms();
            let cp = 2f64.powf(-p) + (2..=l).map(|r| (r as f64).powf(-p)).sum::<f64>();
            (Some(hp), Some(cp))
        }
    };
    Ok(Hardness {
        h1,
        h2,
        hp_prime,
        cp,
        p,
    })
}

/// Reward family named in an instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bernoulli,
    Gaussian,
    LogGaussian,
}

/// On-disk instance description (JSON).
///
/// * `bernoulli`: `means` are success probabilities; the optional
///   `reward_scale` `b` makes rewards take values in `{0, b}`.
/// * `gaussian`: `means` plus `variances` (default 1 when absent).
/// * `log_gaussian`: `means` are the log-domain centres; variance is 1.
///
/// `sub_gaussian_scale` falls back to [`default_scale`] when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub label: String,
    pub family: Family,
    pub means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variances: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub_gaussian_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm_names: Option<Vec<String>>,
}

impl InstanceSpec {
    pub fn to_instance(&self) -> Result<StochasticInstance> {
        let arms: Vec<ArmModel> = match self.family {
            Family::Bernoulli => {
                let scale = self.reward_scale.unwrap_or(1.0);
                self.means
                    .iter()
                    .map(|&p| ArmModel::Bernoulli { p, scale })
                    .collect()
            }
            Family::Gaussian => {
                let variances = match &self.variances {
                    Some(v) if v.len() != self.means.len() => {
                        return Err(BanditError::InvalidInstance(format!(
                            "{} variances for {} means",
                            v.len(),
                            self.means.len()
                        )))
                    }
                    Some(v) => v.clone(),
                    None => vec![1.0; self.means.len()],
                };
                self.means
                    .iter()
                    .zip(variances)
                    .map(|(&mean, variance)| ArmModel::Gaussian { mean, variance })
                    .collect()
            }
            Family::LogGaussian => self
                .means
                .iter()
                .map(|&log_mean| ArmModel::LogDomainGaussian { log_mean })
                .collect(),
        };
        let instance = match self.sub_gaussian_scale {
            Some(sigma) => StochasticInstance::with_scale(self.label.clone(), arms, sigma)?,
            None => StochasticInstance::new(self.label.clone(), arms)?,
        };
        match &self.arm_names {
            Some(names) => instance.with_arm_names(names.clone()),
            None => Ok(instance),
        }
    }

    pub fn from_instance(instance: &StochasticInstance) -> Result<Self> {
        let family = instance.arms[0].family();
        if instance.arms.iter().any(|a| a.family() != family) {
            return Err(BanditError::InvalidInstance(
                "mixed-family instances have no instance-file representation".into(),
            ));
        }
        let mut spec = InstanceSpec {
            label: instance.label.clone(),
            family,
            means: Vec::with_capacity(instance.num_arms()),
            variances: None,
            reward_scale: None,
            sub_gaussian_scale: Some(instance.sub_gaussian_scale),
            arm_names: instance.arm_names.clone(),
        };
        match family {
            Family::Bernoulli => {
                let mut scale = None;
                for arm in &instance.arms {
                    if let ArmModel::Bernoulli { p, scale: b } = *arm {
                        match scale {
                            None => scale = Some(b),
                            Some(s) if s != b => {
                                return Err(BanditError::InvalidInstance(
                                    "Bernoulli arms with different reward scales".into(),
                                ))
                            }
                            Some(_) => {}
                        }
                        spec.means.push(p);
                    }
                }
                spec.reward_scale = scale.filter(|&b| b != 1.0);
            }
            Family::Gaussian => {
                let mut variances = Vec::with_capacity(instance.num_arms());
                for arm in &instance.arms {
                    if let ArmModel::Gaussian { mean, variance } = *arm {
                        spec.means.push(mean);
                        variances.push(variance);
                    }
                }
                spec.variances = Some(variances);
            }
            Family::LogGaussian => {
                spec.means = instance.means();
            }
        }
        Ok(spec)
    }
}

pub fn save_instance(path: &Path, instance: &StochasticInstance) -> Result<()> {
    let spec = InstanceSpec::from_instance(instance)?;
    let text = serde_json::to_string_pretty(&spec).map_err(|e| BanditError::Serde(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| BanditError::io(path, e))
}

pub fn load_instance(path: &Path) -> Result<StochasticInstance> {
    let text = fs::read_to_string(path).map_err(|e| BanditError::io(path, e))?;
    let spec: InstanceSpec =
        serde_json::from_str(&text).map_err(|e| BanditError::Serde(format!("{}: {e}", path.display())))?;
    spec.to_instance()
}
