//! Closed-form regret and failure-probability bounds.
//!
//! Everything here is a pure function of its arguments. Probability bounds
//! are never clamped: a value above 1 is returned as-is and flagged
//! `vacuous` by [`baseline_bounds`].

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::instance::{hardness, GapProfile, StochasticInstance};

/// Constant of the iterated-logarithm inversion; `2 * A1_TIGHT = 2.8` also
/// appears in the failure threshold γ₁.
pub const A1_TIGHT: f64 = 1.4;

/// Constant used by the induction bounding suboptimal pull counts in the
/// failure analysis.
pub const A1_INDUCTION: f64 = 2.0;

/// `6 sqrt(2.8) ≈ 10.04`, rounded up to 11 in the sample-size condition.
const FEASIBILITY_LOG_SCALE: f64 = 11.0;

fn domain(msg: impl Into<String>) -> BanditError {
    BanditError::Domain(msg.into())
}

/// Smallest γ for which the BoBW failure bound is guaranteed:
///
/// `sqrt(2.8 log(6 sqrt(2.8) σ(1+ε)²/Δ + β)) · exp(−(T−L) / (144 σ² (1+ε)³ (H₂ + Δ⁻²)))`.
///
/// The exponential may underflow to exactly 0 for long horizons.
pub fn gamma_1(delta: f64, h2: f64, sigma: f64, epsilon: f64, beta: f64, t: f64, l: usize) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(domain(format!("gap {delta} must be positive")));
    }
    if !(t > l as f64) {
        return Err(domain(format!("horizon {t} must exceed the number of arms {l}")));
    }
    let two_a1 = 2.0 * A1_TIGHT;
    let pre = (two_a1 * (6.0 * two_a1.sqrt() * sigma * (1.0 + epsilon).powi(2) / delta + beta).ln()).sqrt();
    let denom = 144.0 * sigma * sigma * (1.0 + epsilon).powi(3) * (h2 + 1.0 / (delta * delta));
    Ok(pre * (-(t - l as f64) / denom).exp())
}

/// Interval of γ values for which BoBW is simultaneously regret- and
/// failure-optimal on a class of instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaInterval {
    pub t: f64,
    pub lo: f64,
    pub hi: f64,
}

impl GammaInterval {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// `[γ₁(Δ̲, H̄₂), min(log(β+1+ε)/e, log(T)/T, 1/L)]`.
pub fn gamma_interval(
    num_arms: usize,
    sigma: f64,
    t: f64,
    epsilon: f64,
    beta: f64,
    delta_lower: f64,
    h2_upper: f64,
) -> Result<GammaInterval> {
    let lo = gamma_1(delta_lower, h2_upper, sigma, epsilon, beta, t, num_arms)?;
    let hi = ((beta + 1.0 + epsilon).ln() / E)
        .min(t.ln() / t)
        .min(1.0 / num_arms as f64);
    Ok(GammaInterval { t, lo, hi })
}

/// [`gamma_interval`] with `Δ̲` and `H̄₂` taken from the instance itself.
pub fn gamma_interval_for(instance: &StochasticInstance, t: f64, epsilon: f64, beta: f64) -> Result<GammaInterval> {
    let profile = crate::instance::gap_profile(instance)?;
    let h = hardness(&profile, None)?;
    gamma_interval(
        instance.num_arms(),
        instance.sub_gaussian_scale(),
        t,
        epsilon,
        beta,
        profile.min_gap,
        h.h2,
    )
}

/// `(2L(2+ε)/ε) (γ / log(1+ε))^{1+ε}`; may exceed 1.
pub fn bobw_failure_bound(gamma: f64, epsilon: f64, l: usize) -> f64 {
    2.0 * l as f64 * (2.0 + epsilon) / epsilon * (gamma / (1.0 + epsilon).ln()).powf(1.0 + epsilon)
}

/// Both sides of the sample-size condition under which [`bobw_failure_bound`] holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// `(T − L) / (1+ε)³`
    pub available: f64,
    /// `Σ_i 72σ²/Δ_i² · log((2.8/γ²) log(11σ(1+ε)²/Δ_i + β))` with `Δ_i = max(Δ, Δ_{1,i})`.
    pub required: f64,
}

impl Feasibility {
    pub fn holds(&self) -> bool {
        self.available >= self.required
    }
}

pub fn feasibility(t: f64, sigma: f64, epsilon: f64, beta: f64, gamma: f64, profile: &GapProfile) -> Feasibility {
    let l = profile.num_arms();
    let available = (t - l as f64) / (1.0 + epsilon).powi(3);
    let required = profile
        .gaps
        .iter()
        .map(|&g| {
            let d = g.max(profile.min_gap);
            let inner = (FEASIBILITY_LOG_SCALE * sigma * (1.0 + epsilon).powi(2) / d + beta).ln();
            72.0 * sigma * sigma / (d * d) * (2.0 * A1_TIGHT / (gamma * gamma) * inner).ln()
        })
        .sum();
    Feasibility { available, required }
}

pub fn feasibility_check(t: f64, sigma: f64, epsilon: f64, beta: f64, gamma: f64, profile: &GapProfile) -> bool {
    feasibility(t, sigma, epsilon, beta, gamma, profile).holds()
}

/// The three summands of the explicit BoBW regret bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBoundTerms {
    /// `Σ 2Δ_{1,i}`
    pub warm_up: f64,
    /// `Σ 200σ²(1+√ε)²(1+ε)/Δ · log((2a₁/γ) log(10 sqrt(2a₁) σ(1+√ε)(1+ε)/(Δ√γ) + β))`
    pub exploration: f64,
    /// `(2TL(2+ε)/ε)(γ/log(1+ε))^{1+ε}`
    pub failure: f64,
}

impl RegretBoundTerms {
    pub fn total(&self) -> f64 {
        self.warm_up + self.exploration + self.failure
    }
}

/// Explicit pseudo-regret bound of BoBW. `gaps` are the `L − 1` suboptimal gaps.
pub fn bobw_regret_bound_terms(
    t: f64,
    l: usize,
    sigma: f64,
    epsilon: f64,
    beta: f64,
    gamma: f64,
    gaps: &[f64],
) -> Result<RegretBoundTerms> {
    if gaps.len() + 1 != l {
        return Err(BanditError::InvalidParameter(format!(
            "expected {} suboptimal gaps for L = {l}, got {}",
            l.saturating_sub(1),
            gaps.len()
        )));
    }
    if let Some(g) = gaps.iter().find(|&&g| !(g > 0.0)) {
        return Err(domain(format!("suboptimal gap {g} must be positive")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(domain(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    let se = 1.0 + epsilon.sqrt();
    let a1 = A1_TIGHT;
    let warm_up = gaps.iter().map(|g| 2.0 * g).sum();
    let exploration = gaps
        .iter()
        .map(|&d| {
            let inner = 10.0 * (2.0 * a1).sqrt() * sigma * se * (1.0 + epsilon) / (d * gamma.sqrt()) + beta;
            200.0 * sigma * sigma * se * se * (1.0 + epsilon) / d * (2.0 * a1 / gamma * inner.ln()).ln()
        })
        .sum();
    let failure = t * bobw_failure_bound(gamma, epsilon, l);
    Ok(RegretBoundTerms {
        warm_up,
        exploration,
        failure,
    })
}

pub fn bobw_regret_bound_explicit(
    t: f64,
    l: usize,
    sigma: f64,
    epsilon: f64,
    beta: f64,
    gamma: f64,
    gaps: &[f64],
) -> Result<f64> {
    bobw_regret_bound_terms(t, l, sigma, epsilon, beta, gamma, gaps).map(|b| b.total())
}

/// Bound on how often BoBW pulls a suboptimal arm with gap `delta` while all
/// confidence intervals hold:
/// `72σ²(1+√ε)²(1+ε)/Δ² · log((a₁/γ) log(72a₁σ²(1+√ε)²(1+ε)²/(Δ²γ) + β)) + 1` with `a₁ = 2`.
pub fn suboptimal_pull_bound(delta: f64, sigma: f64, epsilon: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(domain(format!("gap {delta} must be positive")));
    }
    let a1 = A1_INDUCTION;
    let k = 72.0 * sigma * sigma * (1.0 + epsilon.sqrt()).powi(2) * (1.0 + epsilon) / (delta * delta);
    let inner = a1 * k * (1.0 + epsilon) / gamma + beta;
    Ok(k * (a1 / gamma * inner.ln()).ln() + 1.0)
}

/// `c log((1.4/ρ) log(1.4ac/ρ + b))`: every `τ > 0` with
/// `τ <= c log(log(aτ + b)/ρ)` lies below this value, provided
/// `1.4ac/ρ + b >= e`.
pub fn iterated_log_inversion(c: f64, a: f64, rho: f64, b: f64) -> Result<f64> {
    let arg = A1_TIGHT * a * c / rho + b;
    if !(arg >= E) {
        return Err(domain(format!("1.4ac/rho + b = {arg} is below e")));
    }
    Ok(c * (A1_TIGHT / rho * arg.ln()).ln())
}

/// Closed-form baseline bounds from the literature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Sequential Halving, `3 log₂L · exp(−T/(8 H₂ log₂L))`.
    ShFailure,
    /// Sequential Halving without the prefactor.
    ShFailureApprox,
    /// UCB-E(α log T), `2α² Σ log T/Δ + (1 + π²/3) Σ Δ`.
    UcbeRegret,
    /// UCB-E(α log T), `2L T^{1 − 2α/25}`.
    UcbeFailure,
    /// UCB-E with its tuned exploration rate, `2TL exp(−(T−L)/(18H₂))`.
    UcbeTunedFailure,
    /// Successive Rejects, `L(L−1) exp(−(T−L)/(loḡ(L) H₂))`.
    SrFailure,
    /// UGapEb, `2TL exp(−(T−L)/(8H₂))`.
    UgapebFailure,
    /// Successive Accepts and Rejects, `2L² exp(−(T−L)/(8 loḡ(L) H₂))`.
    SarFailure,
    /// NSE(p), `(L−1) exp(−2(T−L)/(H'_p C_p))`.
    NseFailure,
    /// Minimax lower bound `(1/6) exp(−400T/(H₂ log L))`.
    CarpentierLower,
    /// Exp3.P high-probability regret `γT + ηLT + ln(L²T/(ηδ)) + ln L/η`.
    Exp3pRegret,
    /// Exp3.P expected regret `γT + ηLT + ln(L²T/η) + ln L/η + 1`.
    Exp3pRegretExpected,
    /// Exp3.P failure `L exp(−γTΔ̄²/(4L))`.
    Exp3pFailure,
    /// UP-ADV failure `L exp(−3TΔ̄²/(28L))`.
    UpAdvFailure,
    /// Adversarial lower bound `(2/65) exp(−150TΔ̲²/L)`, valid for `T >= 10`.
    AdvBaiLower,
    /// `(1 − exp(−3T/200))/4 · exp(−150TΔ̲²/L)`, valid for all `T`.
    AdvBaiLowerGeneral,
    /// Adversarial regret lower bound `ψ (L−1)/(103Δ̲)`.
    AdvTradeoffLower,
}

impl BoundKind {
    pub const ALL: [BoundKind; 17] = [
        BoundKind::ShFailure,
        BoundKind::ShFailureApprox,
        BoundKind::UcbeRegret,
        BoundKind::UcbeFailure,
        BoundKind::UcbeTunedFailure,
        BoundKind::SrFailure,
        BoundKind::UgapebFailure,
        BoundKind::SarFailure,
        BoundKind::NseFailure,
        BoundKind::CarpentierLower,
        BoundKind::Exp3pRegret,
        BoundKind::Exp3pRegretExpected,
        BoundKind::Exp3pFailure,
        BoundKind::UpAdvFailure,
        BoundKind::AdvBaiLower,
        BoundKind::AdvBaiLowerGeneral,
        BoundKind::AdvTradeoffLower,
    ];

    /// Whether the bound is on a probability (and can be vacuous).
    pub fn is_probability(&self) -> bool {
        !matches!(
            self,
            BoundKind::UcbeRegret
                | BoundKind::Exp3pRegret
                | BoundKind::Exp3pRegretExpected
                | BoundKind::AdvTradeoffLower
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::ShFailure => "sh_failure",
            BoundKind::ShFailureApprox => "sh_failure_approx",
            BoundKind::UcbeRegret => "ucbe_regret",
            BoundKind::UcbeFailure => "ucbe_failure",
            BoundKind::UcbeTunedFailure => "ucbe_tuned_failure",
            BoundKind::SrFailure => "sr_failure",
            BoundKind::UgapebFailure => "ugapeb_failure",
            BoundKind::SarFailure => "sar_failure",
            BoundKind::NseFailure => "nse_failure",
            BoundKind::CarpentierLower => "carpentier_lower",
            BoundKind::Exp3pRegret => "exp3p_regret",
            BoundKind::Exp3pRegretExpected => "exp3p_regret_expected",
            BoundKind::Exp3pFailure => "exp3p_failure",
            BoundKind::UpAdvFailure => "up_adv_failure",
            BoundKind::AdvBaiLower => "adv_bai_lower",
            BoundKind::AdvBaiLowerGeneral => "adv_bai_lower_general",
            BoundKind::AdvTradeoffLower => "adv_tradeoff_lower",
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| BanditError::InvalidParameter(format!("unknown bound kind {s:?}")))
    }
}

/// Named inputs shared by the bound evaluators. Each evaluator reads only
/// the fields it needs and reports the first missing one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundInputs {
    pub t: Option<f64>,
    pub l: Option<usize>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Suboptimal gaps `Δ_{1,i}`; also supplies `L`, `H₂` and `Δ` when those are absent.
    pub gaps: Option<Vec<f64>>,
    pub h2: Option<f64>,
    /// Lower bound on the minimal (empirical) gap.
    pub delta_lower: Option<f64>,
    pub h2_upper: Option<f64>,
    pub r_bar: Option<f64>,
    pub v_bar: Option<f64>,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub p: Option<f64>,
    /// Empirically minimal gap `Δ̄_T` of an adversarial table.
    pub empirical_gap: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, name: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| BanditError::InvalidParameter(format!("{kind} needs input {name}")))
}

impl BoundInputs {
    fn profile(&self) -> Option<Result<GapProfile>> {
        self.gaps.as_ref().map(|g| {
            let mut means = vec![0.0];
            means.extend(g.iter().map(|x| -x));
            GapProfile::from_means(&means)
        })
    }

    fn arms(&self, kind: &str) -> Result<usize> {
        match (self.l, &self.gaps) {
            (Some(l), _) => Ok(l),
            (None, Some(g)) => Ok(g.len() + 1),
            _ => need(None, "l", kind),
        }
    }

    fn h2(&self, kind: &str) -> Result<f64> {
        if let Some(h) = self.h2 {
            return Ok(h);
        }
        match self.profile() {
            Some(p) => Ok(hardness(&p?, None)?.h2),
            None => need(None, "h2", kind),
        }
    }

    fn gap_list(&self, kind: &str) -> Result<&[f64]> {
        self.gaps
            .as_deref()
            .ok_or_else(|| BanditError::InvalidParameter(format!("{kind} needs input gaps")))
    }
}

/// A bound value together with its validity flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: f64,
    /// A probability bound of at least 1.
    pub vacuous: bool,
    /// Side condition of the source result that does not hold for these inputs.
    pub condition_violated: Option<String>,
}

/// `1/2 + Σ_{i=2}^{L} 1/i`.
fn log_bar(l: usize) -> f64 {
    0.5 + (2..=l).map(|i| 1.0 / i as f64).sum::<f64>()
}

pub fn baseline_bounds(kind: BoundKind, inputs: &BoundInputs) -> Result<BoundValue> {
    let name = kind.name();
    let mut violated: Option<String> = None;
    let value = match kind {
        BoundKind::ShFailure | BoundKind::ShFailureApprox => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)?;
            let h2 = inputs.h2(name)?;
            if l < 2 {
                return Err(domain("sequential halving bound needs L >= 2"));
            }
            let log2l = (l as f64).log2();
            let tail = (-t / (8.0 * h2 * log2l)).exp();
            if kind == BoundKind::ShFailure {
                3.0 * log2l * tail
            } else {
                tail
            }
        }
        BoundKind::UcbeRegret => {
            let t = need(inputs.t, "t", name)?;
            let alpha = need(inputs.alpha, "alpha", name)?;
            let gaps = inputs.gap_list(name)?;
            let l = gaps.len() + 1;
            let h2 = inputs.h2(name)?;
            if !(alpha > 12.5) {
                violated = Some(format!("alpha = {alpha} must exceed 12.5"));
            } else if alpha * t.ln() > 25.0 * (t - l as f64) / (36.0 * h2) {
                violated = Some("alpha log T exceeds 25(T-L)/(36 H2)".into());
            }
            let lt = t.ln();
            2.0 * alpha * alpha * gaps.iter().map(|g| lt / g).sum::<f64>()
                + (1.0 + PI * PI / 3.0) * gaps.iter().sum::<f64>()
        }
        BoundKind::UcbeFailure => {
            let t = need(inputs.t, "t", name)?;
            let alpha = need(inputs.alpha, "alpha", name)?;
            let l = inputs.arms(name)?;
            if !(alpha > 12.5) {
                violated = Some(format!("alpha = {alpha} must exceed 12.5"));
            }
            2.0 * l as f64 * t.powf(1.0 - 2.0 * alpha / 25.0)
        }
        BoundKind::UcbeTunedFailure | BoundKind::UgapebFailure => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)? as f64;
            let h2 = inputs.h2(name)?;
            let k = if kind == BoundKind::UcbeTunedFailure { 18.0 } else { 8.0 };
            2.0 * t * l * (-(t - l) / (k * h2)).exp()
        }
        BoundKind::SrFailure => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)?;
            let h2 = inputs.h2(name)?;
            let lf = l as f64;
            lf * (lf - 1.0) * (-(t - lf) / (log_bar(l) * h2)).exp()
        }
        BoundKind::SarFailure => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)?;
            let h2 = inputs.h2(name)?;
            let lf = l as f64;
            2.0 * lf * lf * (-(t - lf) / (8.0 * log_bar(l) * h2)).exp()
        }
        BoundKind::NseFailure => {
            let t = need(inputs.t, "t", name)?;
            let p = need(inputs.p, "p", name)?;
            let profile = match inputs.profile() {
                Some(p) => p?,
                None => return Err(BanditError::InvalidParameter(format!("{name} needs input gaps"))),
            };
            let h = hardness(&profile, Some(p))?;
            let lf = profile.num_arms() as f64;
            (lf - 1.0) * (-2.0 * (t - lf) / (h.hp_prime.unwrap() * h.cp.unwrap())).exp()
        }
        BoundKind::CarpentierLower => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)?;
            let h2 = inputs.h2(name)?;
            (-400.0 * t / (h2 * (l as f64).ln())).exp() / 6.0
        }
        BoundKind::Exp3pRegret | BoundKind::Exp3pRegretExpected => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)? as f64;
            let gamma = need(inputs.gamma, "gamma", name)?;
            let eta = need(inputs.eta, "eta", name)?;
            if gamma > 0.5 {
                violated = Some(format!("gamma = {gamma} exceeds 1/2"));
            } else if l * eta > gamma {
                violated = Some(format!("L eta = {} exceeds gamma = {gamma}", l * eta));
            }
            let base = gamma * t + eta * l * t + l.ln() / eta;
            if kind == BoundKind::Exp3pRegret {
                let delta = need(inputs.delta, "delta", name)?;
                base + (l * l * t / (eta * delta)).ln()
            } else {
                base + (l * l * t / eta).ln() + 1.0
            }
        }
        BoundKind::Exp3pFailure => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)? as f64;
            let gamma = need(inputs.gamma, "gamma", name)?;
            let d = need(inputs.empirical_gap, "empirical_gap", name)?;
            l * (-gamma * t * d * d / (4.0 * l)).exp()
        }
        BoundKind::UpAdvFailure => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)? as f64;
            let d = need(inputs.empirical_gap, "empirical_gap", name)?;
            l * (-3.0 * t * d * d / (28.0 * l)).exp()
        }
        BoundKind::AdvBaiLower | BoundKind::AdvBaiLowerGeneral => {
            let t = need(inputs.t, "t", name)?;
            let l = inputs.arms(name)? as f64;
            let d = need(inputs.delta_lower, "delta_lower", name)?;
            if !(d > 0.0 && d <= 1.0) {
                violated = Some(format!("gap lower bound {d} must lie in (0, 1]"));
            }
            let tail = (-150.0 * t * d * d / l).exp();
            if kind == BoundKind::AdvBaiLower {
                if t < 10.0 {
                    violated = Some(format!("T = {t} is below 10"));
                }
                2.0 / 65.0 * tail
            } else {
                (1.0 - (-3.0 * t / 200.0).exp()) / 4.0 * tail
            }
        }
        BoundKind::AdvTradeoffLower => {
            let l = inputs.arms(name)? as f64;
            let psi = need(inputs.psi, "psi", name)?;
            let d = need(inputs.delta_lower, "delta_lower", name)?;
            if let Some(t) = inputs.t {
                if t < 10.0 {
                    violated = Some(format!("T = {t} is below 10"));
                }
            }
            psi * (l - 1.0) / (103.0 * d)
        }
    };
    Ok(BoundValue {
        kind,
        value,
        vacuous: kind.is_probability() && value >= 1.0,
        condition_violated: violated,
    })
}

/// Regret lower bounds for algorithms whose failure probability is at most `exp(−φ)/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParetoKind {
    /// Rewards in a range `R̄`, gap at least `Δ̲`: `φ (L−1) R̄ / (8Δ̲)`.
    B1,
    /// Additionally `H₂ <= H̄₂`: `φ Δ̲ H̄₂ R̄³ / 8`.
    B2,
    /// Variances at most `V̄`, gap at least `Δ̲`: `φ (L−1) V̄ / (2Δ̲)`.
    B1Prime,
    /// Additionally `H₂ <= H̄₂`: `φ Δ̲ H̄₂ V̄ / 2`.
    B2Prime,
}

pub fn pareto_lower_bounds(kind: ParetoKind, inputs: &BoundInputs) -> Result<f64> {
    let name = "pareto lower bound";
    let phi = need(inputs.phi, "phi", name)?;
    let d = need(inputs.delta_lower, "delta_lower", name)?;
    let positive = |v: f64, what: &str| {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(domain(format!("{what} = {v} must be positive")))
        }
    };
    positive(phi, "phi")?;
    positive(d, "delta_lower")?;
    Ok(match kind {
        ParetoKind::B1 => {
            let l = inputs.arms(name)? as f64;
            let r = positive(need(inputs.r_bar, "r_bar", name)?, "r_bar")?;
            phi * (l - 1.0) * r / (8.0 * d)
        }
        ParetoKind::B2 => {
            let h = positive(need(inputs.h2_upper, "h2_upper", name)?, "h2_upper")?;
            let r = positive(need(inputs.r_bar, "r_bar", name)?, "r_bar")?;
            phi * d * h * r.powi(3) / 8.0
        }
        ParetoKind::B1Prime => {
            let l = inputs.arms(name)? as f64;
            let v = positive(need(inputs.v_bar, "v_bar", name)?, "v_bar")?;
            phi * (l - 1.0) * v / (2.0 * d)
        }
        ParetoKind::B2Prime => {
            let h = positive(need(inputs.h2_upper, "h2_upper", name)?, "h2_upper")?;
            let v = positive(need(inputs.v_bar, "v_bar", name)?, "v_bar")?;
            phi * d * h * v / 2.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform_profile(l: usize, delta: f64) -> GapProfile {
        let mut means = vec![0.5];
        means.extend(std::iter::repeat_n(0.5 - delta, l - 1));
        GapProfile::from_means(&means).unwrap()
    }

    #[test]
    fn gamma_1_boundary_is_prefactor() {
        let pre = (2.8f64 * (6.0 * 2.8f64.sqrt() * 0.5 * 1.01f64.powi(2) / 0.1 + E).ln()).sqrt();
        let g = gamma_1(0.1, 100.0, 0.5, 0.01, E, 11.0, 10).unwrap();
        assert!(g < pre && g > pre * 0.999);
    }

    #[test]
    fn gamma_1_rejects_short_horizon() {
        assert!(gamma_1(0.1, 100.0, 0.5, 0.01, E, 10.0, 10).is_err());
        assert!(gamma_1(0.0, 100.0, 0.5, 0.01, E, 100.0, 10).is_err());
    }

    #[test]
    fn gamma_1_decreases_along_table_horizons() {
        let h2 = 255.0 / 0.0025;
        let g: Vec<f64> = [1e6, 1e7, 1e8]
            .iter()
            .map(|&t| gamma_1(0.05, h2, 0.5, 0.01, E, t, 256).unwrap())
            .collect();
        assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    }

    #[test]
    fn gamma_1_underflows_to_zero() {
        let g = gamma_1(0.5, 1.0, 0.5, 0.01, E, 1e12, 2).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn interval_upper_endpoints() {
        let h2 = 255.0 / 0.0025;
        for (t, hi) in [(1e6, 1.38e-5), (1e7, 1.61e-6), (1e8, 1.84e-7), (1e9, 2.07e-8)] {
            let iv = gamma_interval(256, 0.5, t, 0.01, E, 0.05, h2).unwrap();
            assert_eq!(iv.hi, t.ln() / t);
            assert_relative_eq!(iv.hi, hi, max_relative = 5e-3);
        }
    }

    #[test]
    fn interval_can_be_empty() {
        let iv = gamma_interval(4, 0.5, 100.0, 0.01, E, 0.1, 300.0).unwrap();
        assert!(iv.is_empty());
    }

    #[test]
    fn failure_bound_reference() {
        // 2 * 64 * 2.01 / 0.01 * (1e-6 / ln 1.01)^1.01
        let direct = 25728.0 * (1e-6 / 1.01f64.ln()).powf(1.01);
        let v = bobw_failure_bound(1e-6, 0.01, 64);
        assert_relative_eq!(v, direct, max_relative = 1e-12);
        assert_relative_eq!(v, 2.35, max_relative = 5e-3);
        assert!(bobw_failure_bound(1e-300, 0.01, 64) < 1e-290);
    }

    #[test]
    fn feasibility_fails_at_t_equal_l() {
        let p = uniform_profile(4, 0.1);
        assert!(!feasibility_check(4.0, 0.5, 0.01, E, 0.1, &p));
        assert!(feasibility_check(1e9, 0.5, 0.01, E, 0.1, &p));
    }

    /// Second transcription of the explicit regret bound, written from the
    /// display term by term without shared helpers.
    fn regret_bound_oracle(t: f64, l: f64, s: f64, e: f64, b: f64, g: f64, gaps: &[f64]) -> f64 {
        let mut total = 0.0;
        for &d in gaps {
            total += 2.0 * d;
        }
        for &d in gaps {
            let c = 200.0 * s.powi(2) * (1.0 + e.sqrt()).powi(2) * (1.0 + e) / d;
            let x = 10.0 * (2.8f64).sqrt() * s * (1.0 + e.sqrt()) * (1.0 + e) / (d * g.sqrt());
            total += c * ((2.8 / g) * (x + b).ln()).ln();
        }
        total + 2.0 * t * l * (2.0 + e) / e * (g / (1.0 + e).ln()).powf(1.0 + e)
    }

    #[test]
    fn regret_bound_matches_oracle() {
        let v = bobw_regret_bound_explicit(1e5, 2, 0.5, 0.01, E, 1e-3, &[0.1]).unwrap();
        let o = regret_bound_oracle(1e5, 2.0, 0.5, 0.01, E, 1e-3, &[0.1]);
        assert!(v.is_finite() && v > 0.0);
        assert_relative_eq!(v, o, max_relative = 1e-12);
        let gaps: Vec<f64> = (1..20).map(|i| 0.01 * i as f64).collect();
        let v = bobw_regret_bound_explicit(1e6, 20, 1.0, 0.3, 1.0, 0.2, &gaps).unwrap();
        let o = regret_bound_oracle(1e6, 20.0, 1.0, 0.3, 1.0, 0.2, &gaps);
        assert_relative_eq!(v, o, max_relative = 1e-12);
    }

    #[test]
    fn regret_bound_single_arm() {
        let v = bobw_regret_bound_explicit(1e4, 1, 0.5, 0.01, E, 1e-3, &[]).unwrap();
        let third = 2.0 * 1e4 * 2.01 / 0.01 * (1e-3 / 1.01f64.ln()).powf(1.01);
        assert_relative_eq!(v, third, max_relative = 1e-12);
    }

    #[test]
    fn regret_bound_rejects_zero_gap() {
        assert!(bobw_regret_bound_explicit(1e4, 2, 0.5, 0.01, E, 1e-3, &[0.0]).is_err());
        assert!(bobw_regret_bound_explicit(1e4, 3, 0.5, 0.01, E, 1e-3, &[0.1]).is_err());
    }

    #[test]
    fn regret_bound_gap_scaling() {
        let a = bobw_regret_bound_terms(1e5, 3, 0.5, 0.01, E, 1e-3, &[0.1, 0.2]).unwrap();
        let b = bobw_regret_bound_terms(1e5, 3, 0.5, 0.01, E, 1e-3, &[0.2, 0.4]).unwrap();
        let ratio = a.exploration / b.exploration;
        // the 1/Δ factor halves; the log term shrinks slightly as gaps grow
        assert!(ratio > 2.0 && ratio < 2.3, "{ratio}");
    }

    #[test]
    fn pull_bound_positive_and_decreasing_in_gap() {
        let a = suboptimal_pull_bound(0.1, 0.5, 0.01, E, 0.01).unwrap();
        let b = suboptimal_pull_bound(0.2, 0.5, 0.01, E, 0.01).unwrap();
        assert!(a > b && b > 1.0);
    }

    #[test]
    fn iterated_log_reference() {
        let direct = 100.0 * ((1.4 / 0.1) * (1.4 * 1.01 * 100.0 / 0.1 + E).ln()).ln();
        let v = iterated_log_inversion(100.0, 1.01, 0.1, E).unwrap();
        assert_relative_eq!(v, direct, max_relative = 1e-14);
        assert_relative_eq!(v, 462.1, max_relative = 1e-3);
        assert!(iterated_log_inversion(100.0, 1.01, 0.01, E).unwrap() > v);
        assert!(iterated_log_inversion(1e-3, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn baseline_reference_values() {
        let mut inp = BoundInputs {
            t: Some(100.0),
            l: Some(10),
            h2: Some(1000.0),
            ..Default::default()
        };
        let v = baseline_bounds(BoundKind::CarpentierLower, &inp).unwrap();
        assert_relative_eq!(v.value, (-40.0 / 10f64.ln()).exp() / 6.0, max_relative = 1e-12);
        assert_relative_eq!(v.value, 4.8e-9, max_relative = 1e-2);

        inp = BoundInputs {
            t: Some(1e4),
            l: Some(2),
            alpha: Some(13.0),
            ..Default::default()
        };
        let v = baseline_bounds(BoundKind::UcbeFailure, &inp).unwrap();
        assert_relative_eq!(v.value, 4.0 * 1e4f64.powf(-0.04), max_relative = 1e-12);
        assert_relative_eq!(v.value, 2.767, max_relative = 1e-3);
        assert!(v.vacuous);

        inp = BoundInputs {
            t: Some(0.0),
            l: Some(8),
            h2: Some(50.0),
            ..Default::default()
        };
        let v = baseline_bounds(BoundKind::ShFailure, &inp).unwrap();
        assert_relative_eq!(v.value, 9.0, max_relative = 1e-12);
        let v = baseline_bounds(BoundKind::ShFailureApprox, &inp).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn baseline_conditions_are_reported() {
        let inp = BoundInputs {
            t: Some(1e4),
            gaps: Some(vec![0.1, 0.2]),
            alpha: Some(13.0),
            ..Default::default()
        };
        let v = baseline_bounds(BoundKind::UcbeRegret, &inp).unwrap();
        // H2 = 125, 25 (T - L)/(36 H2) ~ 55.5 < 13 ln(1e4) ~ 119.7
        assert!(v.condition_violated.is_some());
        let lt = 1e4f64.ln();
        let expect = 2.0 * 169.0 * (lt / 0.1 + lt / 0.2) + (1.0 + PI * PI / 3.0) * 0.3;
        assert_relative_eq!(v.value, expect, max_relative = 1e-12);

        let inp = BoundInputs {
            t: Some(1e3),
            l: Some(4),
            gamma: Some(0.6),
            eta: Some(0.01),
            delta: Some(0.1),
            ..Default::default()
        };
        assert!(baseline_bounds(BoundKind::Exp3pRegret, &inp).unwrap().condition_violated.is_some());
        assert!(baseline_bounds(BoundKind::Exp3pRegret, &BoundInputs { l: Some(4), ..Default::default() }).is_err());
    }

    #[test]
    fn adversarial_reference_values() {
        let inp = BoundInputs {
            t: Some(1e4),
            l: Some(4),
            gamma: Some(0.5),
            empirical_gap: Some(0.05),
            delta_lower: Some(0.05),
            psi: Some(2.0),
            ..Default::default()
        };
        let e = baseline_bounds(BoundKind::Exp3pFailure, &inp).unwrap().value;
        assert_relative_eq!(e, 4.0 * (-0.5 * 1e4 * 0.0025 / 16.0f64).exp(), max_relative = 1e-12);
        let u = baseline_bounds(BoundKind::UpAdvFailure, &inp).unwrap().value;
        assert_relative_eq!(u, 4.0 * (-3.0 * 25.0 / 112.0f64).exp(), max_relative = 1e-12);
        let lo = baseline_bounds(BoundKind::AdvBaiLower, &inp).unwrap().value;
        assert_relative_eq!(lo, 2.0 / 65.0 * (-150.0 * 25.0 / 4.0f64).exp(), max_relative = 1e-12);
        let g = baseline_bounds(BoundKind::AdvBaiLowerGeneral, &inp).unwrap().value;
        assert!(g >= lo);
        let r = baseline_bounds(BoundKind::AdvTradeoffLower, &inp).unwrap().value;
        assert_relative_eq!(r, 2.0 * 3.0 / (103.0 * 0.05), max_relative = 1e-12);
    }

    #[test]
    fn table_six_rows() {
        let inp = BoundInputs {
            t: Some(5000.0),
            gaps: Some(vec![0.2, 0.3, 0.3]),
            p: Some(1.0),
            ..Default::default()
        };
        let h2: f64 = 25.0 + 2.0 / 0.09;
        let lbar: f64 = 0.5 + 0.5 + 1.0 / 3.0 + 0.25;
        let cases = [
            (BoundKind::UcbeTunedFailure, 2.0 * 5000.0 * 4.0 * (-4996.0 / (18.0 * h2)).exp()),
            (BoundKind::UgapebFailure, 2.0 * 5000.0 * 4.0 * (-4996.0 / (8.0 * h2)).exp()),
            (BoundKind::SrFailure, 12.0 * (-4996.0 / (lbar * h2)).exp()),
            (BoundKind::SarFailure, 32.0 * (-4996.0 / (8.0 * lbar * h2)).exp()),
        ];
        for (k, expect) in cases {
            assert_relative_eq!(baseline_bounds(k, &inp).unwrap().value, expect, max_relative = 1e-12);
        }
        // p = 1, ranks 2, 3, 4 with gaps 0.2, 0.3, 0.3: max(2/0.04, 3/0.09, 4/0.09)
        let hp: f64 = 2.0 / 0.04;
        let cp = 0.5 + 0.5 + 1.0 / 3.0 + 0.25;
        let nse = baseline_bounds(BoundKind::NseFailure, &inp).unwrap().value;
        assert_relative_eq!(nse, 3.0 * (-2.0 * 4996.0 / (hp * cp)).exp(), max_relative = 1e-12);
    }

    #[test]
    fn bound_kind_names_roundtrip() {
        for k in BoundKind::ALL {
            assert_eq!(k.name().parse::<BoundKind>().unwrap(), k);
        }
    }

    #[test]
    fn pareto_reference_values() {
        let mut inp = BoundInputs {
            phi: Some(10.0),
            l: Some(11),
            r_bar: Some(1.0),
            delta_lower: Some(0.1),
            ..Default::default()
        };
        assert_relative_eq!(pareto_lower_bounds(ParetoKind::B1, &inp).unwrap(), 125.0, max_relative = 1e-12);
        // uniform gaps: Δ H2 = (L-1)/Δ makes B2 equal B1 at R = 1
        inp.h2_upper = Some(10.0 / 0.01);
        assert_relative_eq!(pareto_lower_bounds(ParetoKind::B2, &inp).unwrap(), 125.0, max_relative = 1e-12);
        // V = R^2 / 4: B1' = φ(L-1)R^2/(8Δ), so B1'/B1 = R
        for r in [1.0, 2.0, 0.5] {
            inp.r_bar = Some(r);
            inp.v_bar = Some(r * r / 4.0);
            let ratio =
                pareto_lower_bounds(ParetoKind::B1Prime, &inp).unwrap() / pareto_lower_bounds(ParetoKind::B1, &inp).unwrap();
            assert_relative_eq!(ratio, r, max_relative = 1e-12);
        }
        inp.v_bar = Some(0.25);
        assert_relative_eq!(
            pareto_lower_bounds(ParetoKind::B2Prime, &inp).unwrap(),
            10.0 * 0.1 * 1000.0 * 0.25 / 2.0,
            max_relative = 1e-12
        );
        inp.phi = Some(0.0);
        assert!(pareto_lower_bounds(ParetoKind::B1, &inp).is_err());
    }

    /// Does some τ on a dense grid satisfy τ <= f(τ) while exceeding `bound`?
    fn grid_counterexample(c: f64, a: f64, rho: f64, b: f64, bound: f64) -> Option<f64> {
        let f = |tau: f64| c * ((a * tau + b).ln() / rho).ln();
        let top = bound * 1e3 + 10.0;
        let n = 4000;
        (1..=n)
            .flat_map(|k| {
                let lin = top * k as f64 / n as f64;
                let log = (bound.max(1e-9)) * (1e3f64).powf(k as f64 / n as f64);
                [lin, log]
            })
            .find(|&tau| tau > bound * (1.0 + 1e-12) && tau <= f(tau))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn iterated_log_dominates_fixed_points(
            lc in -1.0f64..4.0,
            a in 0.5f64..3.0,
            lrho in -6.0f64..-0.01,
            b in 0.0f64..10.0,
        ) {
            let c = 10f64.powf(lc);
            let rho = 10f64.powf(lrho);
            prop_assume!(A1_TIGHT * a * c / rho + b >= E);
            let bound = iterated_log_inversion(c, a, rho, b).unwrap();
            prop_assert_eq!(grid_counterexample(c, a, rho, b, bound), None);
        }
    }

    proptest! {
        #[test]
        fn gamma_1_monotone(
            t in 1e3f64..1e6,
            dt in 1.0f64..1e5,
            h2 in 10.0f64..1e4,
            dh in 1.0f64..1e3,
        ) {
            let g = |t: f64, h: f64| gamma_1(0.1, h, 0.5, 0.01, E, t, 8).unwrap();
            let base = g(t, h2);
            prop_assume!(base > 0.0);
            prop_assert!(g(t + dt, h2) < base);
            prop_assert!(g(t, h2 + dh) > base);
        }

        #[test]
        fn failure_bound_increasing_in_gamma(g in 1e-9f64..0.5, k in 1.001f64..2.0, eps in 0.01f64..0.99) {
            prop_assert!(bobw_failure_bound(g * k, eps, 4) > bobw_failure_bound(g, eps, 4));
        }

        #[test]
        fn exploration_term_decreasing_in_gamma(g in 1e-9f64..0.5, k in 1.001f64..1.9) {
            let terms = |gamma| bobw_regret_bound_terms(1e5, 3, 0.5, 0.01, E, gamma, &[0.1, 0.3]).unwrap();
            prop_assert!(terms(g * k).exploration < terms(g).exploration);
        }

        #[test]
        fn min_gap_relation(gaps in proptest::collection::vec(0.01f64..1.0, 1..20)) {
            let inp = BoundInputs { gaps: Some(gaps.clone()), ..Default::default() };
            let h2 = inp.h2("test").unwrap();
            let d = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
            let l = gaps.len() as f64 + 1.0;
            prop_assert!(d * h2 <= (l - 1.0) / d * (1.0 + 1e-12));
        }
    }
}
