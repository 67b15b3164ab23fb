//! Instance families from the regret / identification lower-bound constructions.
//!
//! Every family consists of `L` related instances. Documentation numbers
//! instances 1..=L; in code instance `k` (0-based) is the one whose arm `k`
//! is flipped to become optimal, and instance 0 is the unflipped base.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{BanditError, Result};
use crate::instance::{ArmModel, StochasticInstance};
use crate::rng::RngStream;

fn check_offsets(l: usize, d: &[f64]) -> Result<()> {
    if l < 2 {
        return Err(BanditError::Domain("a family needs at least two arms".into()));
    }
    if d.len() != l - 1 {
        return Err(BanditError::Domain(format!(
            "expected {} offsets for arms 2..={l}, got {}",
            l - 1,
            d.len()
        )));
    }
    Ok(())
}

/// Means `1/2` for arm 0 and `1/2 − d_j` for arm `j`; instance `k >= 1`
/// raises arm `k` to `1/2 + d_k`.
fn flipped_means(d: &[f64], k: usize) -> Vec<f64> {
    let mut means = vec![0.5];
    means.extend(d.iter().map(|x| 0.5 - x));
    if k > 0 {
        means[k] = 0.5 + d[k - 1];
    }
    means
}

/// Bernoulli family with rewards in `{0, b}`. `d[j − 1]` is the offset of
/// arm `j` and must lie in `(0, 1/4]`.
pub fn bern_family(l: usize, d: &[f64], b: f64) -> Result<Vec<StochasticInstance>> {
    check_offsets(l, d)?;
    if let Some(x) = d.iter().find(|&&x| !(x > 0.0 && x <= 0.25)) {
        return Err(BanditError::Domain(format!("offset {x} outside (0, 1/4]")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(BanditError::Domain(format!("reward scale {b} must be positive")));
    }
    (0..l)
        .map(|k| {
            let arms = flipped_means(d, k)
                .into_iter()
                .map(|p| ArmModel::Bernoulli { p, scale: b })
                .collect();
            StochasticInstance::new(format!("bern_family:L={l},b={b},instance={}", k + 1), arms)
        })
        .collect()
}

/// Gaussian family with common variance `σ²`; offsets must be positive.
pub fn gauss_family(l: usize, d: &[f64], sigma: f64) -> Result<Vec<StochasticInstance>> {
    check_offsets(l, d)?;
    if let Some(x) = d.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(BanditError::Domain(format!("offset {x} must be positive")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(BanditError::Domain(format!("sigma {sigma} must be positive")));
    }
    (0..l)
        .map(|k| {
            let arms = flipped_means(d, k)
                .into_iter()
                .map(|m| ArmModel::gaussian(m, sigma * sigma))
                .collect();
            StochasticInstance::new(format!("gauss_family:L={l},sigma={sigma},instance={}", k + 1), arms)
        })
        .collect()
}

/// `p(ε, σ) = 1 − exp(−(1 − 2ε)² / (8σ²))`.
pub fn clipped_gap_probability(epsilon: f64, sigma: f64) -> f64 {
    1.0 - (-(1.0 - 2.0 * epsilon).powi(2) / (8.0 * sigma * sigma)).exp()
}

/// A fixed `T × L` reward table.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialInstance {
    label: String,
    num_arms: usize,
    horizon: usize,
    /// Row-major: step `t` occupies `rewards[t * L .. (t + 1) * L]`.
    rewards: Vec<f64>,
    gains: Vec<f64>,
    best_arm: usize,
}

impl AdversarialInstance {
    /// Wraps a row-major table. Fails unless all rewards lie in `[0, 1]` and
    /// the total-gain maximiser is unique.
    pub fn from_table(label: impl Into<String>, num_arms: usize, rewards: Vec<f64>) -> Result<Self> {
        if num_arms == 0 || rewards.is_empty() || rewards.len() % num_arms != 0 {
            return Err(BanditError::InvalidInstance(format!(
                "table of {} entries does not split into rows of {num_arms}",
                rewards.len()
            )));
        }
        if let Some(r) = rewards.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(BanditError::InvalidInstance(format!("reward {r} outside [0, 1]")));
        }
        let mut gains = vec![0.0; num_arms];
        for row in rewards.chunks_exact(num_arms) {
            for (g, r) in gains.iter_mut().zip(row) {
                *g += r;
            }
        }
        let steps = (rewards.len() / num_arms) as f64;
        let averages: Vec<f64> = gains.iter().map(|g| g / steps).collect();
        let profile = crate::instance::GapProfile::from_means(&averages)?;
        Ok(AdversarialInstance {
            label: label.into(),
            num_arms,
            horizon: rewards.len() / num_arms,
            rewards,
            gains,
            best_arm: profile.optimal_arm,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Reward of `arm` at 0-based step `t`.
    #[inline]
    pub fn reward(&self, t: usize, arm: usize) -> f64 {
        self.rewards[t * self.num_arms + arm]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.rewards[t * self.num_arms..(t + 1) * self.num_arms]
    }

    /// Total gains `G_{i,T}`.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// The empirically optimal arm (unique by construction).
    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    /// `(G_i − G_j) / T`.
    pub fn empirical_gap(&self, i: usize, j: usize) -> f64 {
        (self.gains[i] - self.gains[j]) / self.horizon as f64
    }

    /// Smallest empirical gap between the best arm and any other arm.
    /// Infinite for a single arm.
    pub fn min_empirical_gap(&self) -> f64 {
        (0..self.num_arms)
            .filter(|&j| j != self.best_arm)
            .map(|j| self.empirical_gap(self.best_arm, j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Writes `t,arm,reward` rows (0-based `t` and `arm`).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.rewards.len() * 24);
        out.push_str("t,arm,reward\n");
        for t in 0..self.horizon {
            for (arm, r) in self.row(t).iter().enumerate() {
                out.push_str(&format!("{t},{arm},{r}\n"));
            }
        }
        let mut f = fs::File::create(path).map_err(|e| BanditError::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| BanditError::io(path, e))
    }

    /// Reads a table written by [`AdversarialInstance::write_csv`]. Every
    /// `(t, arm)` cell must appear exactly once.
    pub fn read_csv(path: &Path, label: impl Into<String>) -> Result<Self> {
        let parse = |line: u64, message: String| BanditError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| BanditError::io(path, e))?;
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("t,arm,reward") {
            return Err(parse(1, "expected header t,arm,reward".into()));
        }
        let mut cells = Vec::new();
        for (i, line) in lines.enumerate() {
            let line_no = i as u64 + 2;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || parse(line_no, format!("malformed row {line:?}"));
            if fields.len() != 3 {
                return Err(bad());
            }
            let t: usize = fields[0].parse().map_err(|_| bad())?;
            let arm: usize = fields[1].parse().map_err(|_| bad())?;
            let r: f64 = fields[2].parse().map_err(|_| bad())?;
            cells.push((t, arm, r, line_no));
        }
        let horizon = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
        let num_arms = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
        let mut table = vec![f64::NAN; horizon * num_arms];
        for &(t, arm, r, line_no) in &cells {
            let slot = &mut table[t * num_arms + arm];
            if !slot.is_nan() {
                return Err(parse(line_no, format!("cell (t={t}, arm={arm}) repeated")));
            }
            *slot = r;
        }
        if cells.len() != table.len() {
            return Err(parse(0, format!("expected {} cells, found {}", table.len(), cells.len())));
        }
        Self::from_table(label, num_arms, table)
    }
}

fn clip(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Clipped-Gaussian adversarial table for instance `ell` (0-based).
///
/// Step 0 is deterministic: `1/2` for arm 0, `1/2 + ε` for arm `ell` when
/// `ell > 0`, `1/2 − ε` elsewhere. Later steps draw a shared
/// `Z_t ~ N(1/2, σ²)` and apply the same offsets before clipping to `[0, 1]`.
/// The noise depends only on `rng`, so tables for different `ell` built from
/// clones of one stream share every `Z_t`.
///
/// Should the best arm be tied (a null event), the table is redrawn from the
/// next stream of the same seed.
pub fn adversarial_clipped_family(
    l: usize,
    horizon: usize,
    epsilon: f64,
    sigma: f64,
    ell: usize,
    rng: &RngStream,
) -> Result<AdversarialInstance> {
    if l < 2 || ell >= l {
        return Err(BanditError::Domain(format!("need L >= 2 and instance < L (L = {l}, instance = {ell})")));
    }
    if horizon == 0 {
        return Err(BanditError::Domain("horizon must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(BanditError::Domain(format!("epsilon {epsilon} outside (0, 1/2)")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(BanditError::Domain(format!("sigma {sigma} must be positive")));
    }
    let mut stream = rng.clone();
    loop {
        let mut rewards = Vec::with_capacity(horizon * l);
        for t in 0..horizon {
            let z = if t == 0 {
                0.5
            } else {
                let n: f64 = StandardNormal.sample(&mut stream);
                0.5 + sigma * n
            };
            for arm in 0..l {
                let r = if arm == 0 {
                    clip(z)
                } else if arm == ell {
                    clip(z + epsilon)
                } else {
                    clip(z - epsilon)
                };
                rewards.push(r);
            }
        }
        let label = format!("clipped_gauss:L={l},T={horizon},eps={epsilon},sigma={sigma},instance={}", ell + 1);
        match AdversarialInstance::from_table(label, l, rewards) {
            Err(BanditError::NonUniqueOptimum { .. }) => {
                log::warn!(
                    "tied empirical optimum on stream {}; regenerating from the next stream",
                    stream.stream_id()
                );
                stream = RngStream::new(stream.seed(), stream.stream_id().wrapping_add(1));
            }
            other => return other,
        }
    }
}
