//! Seeded, parallel Monte-Carlo runs of policies on stochastic instances and
//! adversarial reward tables, with order-independent aggregation and CSV export.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::hard_instances::AdversarialInstance;
use crate::instance::{gap_profile, StochasticInstance};
use crate::policy::{policy_init, BanditPolicy, PolicyParams};
use crate::rng::{RngStream, StreamLane};

/// Version of both CSV schemas; bump on any column change.
pub const SCHEMA_VERSION: u32 = 1;

/// Sub-Gaussian scale assumed for rewards in `[0, 1]` tables.
const UNIT_INTERVAL_SCALE: f64 = 0.5;

/// What the policy plays against.
#[derive(Debug, Clone)]
pub enum Environment {
    Stochastic(StochasticInstance),
    Adversarial(AdversarialInstance),
}

impl From<StochasticInstance> for Environment {
    fn from(i: StochasticInstance) -> Self {
        Environment::Stochastic(i)
    }
}

impl From<AdversarialInstance> for Environment {
    fn from(i: AdversarialInstance) -> Self {
        Environment::Adversarial(i)
    }
}

impl Environment {
    pub fn num_arms(&self) -> usize {
        match self {
            Environment::Stochastic(i) => i.num_arms(),
            Environment::Adversarial(a) => a.num_arms(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Environment::Stochastic(i) => &i.label,
            Environment::Adversarial(a) => a.label(),
        }
    }

    fn sub_gaussian_scale(&self) -> f64 {
        match self {
            Environment::Stochastic(i) => i.sub_gaussian_scale(),
            Environment::Adversarial(_) => UNIT_INTERVAL_SCALE,
        }
    }

    /// Per-arm regret weights (true gaps, or empirical gaps to the table's
    /// optimum) and the arm counted as correct.
    fn regret_weights(&self) -> Result<(Vec<f64>, usize)> {
        match self {
            Environment::Stochastic(i) => {
                let p = gap_profile(i)?;
                Ok((p.gaps, p.optimal_arm))
            }
            Environment::Adversarial(a) => {
                let best = a.best_arm();
                let gaps = (0..a.num_arms()).map(|j| a.empirical_gap(best, j)).collect();
                Ok((gaps, best))
            }
        }
    }
}

/// How long a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol {
    /// Exactly `horizon` steps.
    FixedBudget { horizon: u64 },
    /// Until the policy stops or `step_cap` steps have passed.
    FixedConfidence { delta: f64, step_cap: u64 },
}

impl Protocol {
    /// Fixed confidence with the default cap of `100 T`.
    pub fn fixed_confidence_for(delta: f64, paired_budget: u64) -> Self {
        Protocol::FixedConfidence {
            delta,
            step_cap: paired_budget.saturating_mul(100),
        }
    }

    pub fn max_steps(&self) -> u64 {
        match *self {
            Protocol::FixedBudget { horizon } => horizon,
            Protocol::FixedConfidence { step_cap, .. } => step_cap,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::FixedBudget { horizon } => write!(f, "fixed_budget(T={horizon})"),
            Protocol::FixedConfidence { delta, step_cap } => {
                write!(f, "fixed_confidence(delta={delta},step_cap={step_cap})")
            }
        }
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub steps_used: u64,
    /// `Σ_i N_i Δ_i` from the final pull counts.
    pub pseudo_regret: f64,
    /// `Σ_t (g_{best,t} − g_{i_t,t})`; adversarial tables only.
    pub realized_regret: Option<f64>,
    pub recommended_arm: usize,
    pub correct: bool,
    /// The policy's own stopping rule fired.
    pub stopped_early: bool,
    /// A fixed-confidence run reached its step cap without stopping.
    pub capped: bool,
}

fn check_pairing(params: &PolicyParams, protocol: &Protocol, env: &Environment) -> Result<()> {
    if params.is_fixed_confidence() != matches!(protocol, Protocol::FixedConfidence { .. }) {
        return Err(BanditError::InvalidParameter(format!(
            "{} cannot run under {protocol}",
            params.label()
        )));
    }
    if let (PolicyParams::UcbAlpha { delta, .. }, Protocol::FixedConfidence { delta: target, .. }) = (params, protocol) {
        if delta != target {
            return Err(BanditError::InvalidParameter(format!(
                "policy delta {delta} differs from the protocol's {target}"
            )));
        }
    }
    let steps = protocol.max_steps();
    let warm_up = matches!(
        params,
        PolicyParams::Bobw { .. } | PolicyParams::UcbE { .. } | PolicyParams::UcbAlpha { .. }
    );
    if warm_up && steps < env.num_arms() as u64 {
        return Err(BanditError::BudgetTooSmall {
            budget: steps,
            reason: format!("the warm-up alone needs {} steps", env.num_arms()),
        });
    }
    if let Environment::Adversarial(a) = env {
        if steps > a.horizon() as u64
            || matches!(protocol, Protocol::FixedBudget { horizon } if *horizon != a.horizon() as u64)
        {
            return Err(BanditError::InvalidParameter(format!(
                "{protocol} does not fit a reward table of {} rows",
                a.horizon()
            )));
        }
    }
    Ok(())
}

/// Runs trial `trial` of a batch seeded with `seed`.
///
/// Rewards and policy randomness come from separate streams of the trial,
/// so changing the policy leaves the reward draws of a given arm pull order
/// untouched.
pub fn run_trial(
    params: &PolicyParams,
    env: &Environment,
    protocol: &Protocol,
    seed: u64,
    trial: u64,
) -> Result<TrialRecord> {
    check_pairing(params, protocol, env)?;
    let (weights, optimal) = env.regret_weights()?;
    run_prepared(params, env, protocol, seed, trial, &weights, optimal)
}

fn run_prepared(
    params: &PolicyParams,
    env: &Environment,
    protocol: &Protocol,
    seed: u64,
    trial: u64,
    weights: &[f64],
    optimal: usize,
) -> Result<TrialRecord> {
    let params = params.resolved(env.sub_gaussian_scale());
    let max_steps = protocol.max_steps();
    let mut policy = policy_init(&params, env.num_arms(), max_steps)?;
    let mut policy_rng = RngStream::for_trial(seed, trial, StreamLane::Policy);
    let mut reward_rng = RngStream::for_trial(seed, trial, StreamLane::Rewards);

    let mut realized = None;
    match env {
        Environment::Stochastic(inst) => {
            let arms = inst.arms();
            for _ in 0..max_steps {
                if policy.has_stopped() {
                    break;
                }
                let arm = policy.select_arm(&mut policy_rng)?;
                policy.update(arm, arms[arm].sample(&mut reward_rng));
            }
        }
        Environment::Adversarial(table) => {
            let best = table.best_arm();
            let mut total = 0.0;
            for t in 0..max_steps as usize {
                if policy.has_stopped() {
                    break;
                }
                let arm = policy.select_arm(&mut policy_rng)?;
                let row = table.row(t);
                total += row[best] - row[arm];
                policy.update(arm, row[arm]);
            }
            realized = Some(total);
        }
    }

    let stats = policy.stats();
    let pseudo_regret = stats
        .pulls()
        .iter()
        .zip(weights)
        .map(|(&n, &w)| n as f64 * w)
        .sum();
    let stopped_early = policy.has_stopped();
    let recommended_arm = policy.recommend()?;
    Ok(TrialRecord {
        trial,
        seed,
        steps_used: stats.t(),
        pseudo_regret,
        realized_regret: realized,
        recommended_arm,
        correct: recommended_arm == optimal,
        stopped_early,
        capped: params.is_fixed_confidence() && !stopped_early,
    })
}

/// Labels attached to every aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub algorithm: String,
    /// Parameters after the scale of the instance has been filled in.
    pub params: PolicyParams,
    pub instance_label: String,
    pub protocol: Protocol,
}

/// Summary statistics of one (policy, instance, protocol) batch.
/// Standard deviations divide by the number of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub metadata: BatchMetadata,
    pub n_trials: u64,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_realized_regret: Option<f64>,
    pub failure_count: u64,
    pub failure_probability: f64,
    pub mean_stop_time: f64,
    pub std_stop_time: f64,
    pub capped_count: u64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mergeable collection of trial records.
///
/// Merging only concatenates; [`Aggregator::finish`] sorts by trial index
/// before any arithmetic, so the result does not depend on how records were
/// partitioned or in which order they arrived.
#[derive(Debug, Clone, Default)]
pub struct Aggregator {
    records: Vec<TrialRecord>,
}

impl Aggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: TrialRecord) {
        self.records.push(record);
    }

    pub fn merge(mut self, other: Aggregator) -> Aggregator {
        self.records.extend(other.records);
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn finish(mut self, metadata: BatchMetadata) -> Result<AggregateResult> {
        if self.records.is_empty() {
            return Err(BanditError::InvalidParameter("no trial records to aggregate".into()));
        }
        self.records.sort_by_key(|r| r.trial);
        if let Some(w) = self.records.windows(2).find(|w| w[0].trial == w[1].trial) {
            return Err(BanditError::InvalidParameter(format!("trial {} recorded twice", w[0].trial)));
        }
        let recs = &self.records;
        let n = recs.len() as u64;
        let (mean_regret, std_regret) = mean_std(recs.iter().map(|r| r.pseudo_regret));
        let (mean_stop_time, std_stop_time) = mean_std(recs.iter().map(|r| r.steps_used as f64));
        let mean_realized_regret = if recs.iter().all(|r| r.realized_regret.is_some()) {
            Some(mean_std(recs.iter().filter_map(|r| r.realized_regret)).0)
        } else {
            None
        };
        let failure_count = recs.iter().filter(|r| !r.correct).count() as u64;
        Ok(AggregateResult {
            metadata,
            n_trials: n,
            mean_regret,
            std_regret,
            mean_realized_regret,
            failure_count,
            failure_probability: failure_count as f64 / n as f64,
            mean_stop_time,
            std_stop_time,
            capped_count: recs.iter().filter(|r| r.capped).count() as u64,
        })
    }
}

impl FromIterator<TrialRecord> for Aggregator {
    fn from_iter<I: IntoIterator<Item = TrialRecord>>(iter: I) -> Self {
        Aggregator {
            records: iter.into_iter().collect(),
        }
    }
}

/// A sweep of policies against one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub policies: Vec<PolicyParams>,
    pub protocol: Protocol,
    pub n_trials: u64,
    pub base_seed: u64,
    /// Worker threads; `None` lets rayon decide.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Output prefix; `.trials.csv` and `.agg.csv` are appended.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(policies: Vec<PolicyParams>, protocol: Protocol, n_trials: u64, base_seed: u64) -> Self {
        ExperimentConfig {
            policies,
            protocol,
            n_trials,
            base_seed,
            workers: None,
            output: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_output(mut self, prefix: impl Into<PathBuf>) -> Self {
        self.output = Some(prefix.into());
        self
    }
}

/// Records and summary of one policy in a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub aggregate: AggregateResult,
    pub trials: Vec<TrialRecord>,
}

/// Runs every policy of `config` for `n_trials` trials on `env`.
///
/// Trial `k` of every policy uses the streams of `(base_seed, k)`, so policies
/// face common random numbers. Results are identical for any worker count.
pub fn run_batch(config: &ExperimentConfig, env: &Environment) -> Result<Vec<PolicyRun>> {
    if config.n_trials == 0 {
        return Err(BanditError::InvalidParameter("n_trials must be at least 1".into()));
    }
    if config.policies.is_empty() {
        return Err(BanditError::InvalidParameter("no policies to run".into()));
    }
    let (weights, optimal) = env.regret_weights()?;
    if let Environment::Stochastic(inst) = env {
        if crate::instance::gap_profile(inst)?.unit_gap_violated {
            log::warn!("{}: some optimality gap exceeds 1; bounds assuming unit gaps do not apply", env.label());
        }
    }
    for params in &config.policies {
        for w in params.validate()? {
            log::warn!("{}: {w}", params.label());
        }
        check_pairing(params, &config.protocol, env)?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| BanditError::InvalidParameter(format!("cannot start worker pool: {e}")))?;

    let mut runs = Vec::with_capacity(config.policies.len());
    for params in &config.policies {
        log::info!(
            "running {} x {} trials on {} under {}",
            params.label(),
            config.n_trials,
            env.label(),
            config.protocol
        );
        let trials: Vec<TrialRecord> = pool.install(|| {
            (0..config.n_trials)
                .into_par_iter()
                .map(|k| run_prepared(params, env, &config.protocol, config.base_seed, k, &weights, optimal))
                .collect::<Result<_>>()
        })?;
        let capped = trials.iter().filter(|r| r.capped).count();
        if capped > 0 {
            log::warn!("{}: {capped} trials hit the step cap without stopping", params.label());
        }
        let metadata = BatchMetadata {
            algorithm: params.kind().as_str().to_string(),
            params: params.resolved(env.sub_gaussian_scale()),
            instance_label: env.label().to_string(),
            protocol: config.protocol,
        };
        let aggregate = trials.iter().cloned().collect::<Aggregator>().finish(metadata)?;
        runs.push(PolicyRun { aggregate, trials });
    }
    if let Some(prefix) = &config.output {
        write_outputs(prefix, &runs)?;
    }
    Ok(runs)
}

/// One point of a γ sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub gamma: f64,
    pub mean_regret: f64,
    pub failure_probability: f64,
    pub run: PolicyRun,
}

/// Runs BoBW over an ascending γ grid with common trial seeds. `template`
/// supplies every BoBW parameter except γ.
pub fn pareto_sweep(
    config: &ExperimentConfig,
    template: PolicyParams,
    gammas: &[f64],
    env: &Environment,
) -> Result<Vec<ParetoPoint>> {
    let PolicyParams::Bobw { sigma, epsilon, beta, .. } = template else {
        return Err(BanditError::InvalidParameter("a gamma sweep needs a BoBW template".into()));
    };
    if gammas.is_empty() || gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(BanditError::InvalidParameter("gamma grid must be non-empty and strictly ascending".into()));
    }
    let mut sweep = config.clone();
    sweep.policies = gammas
        .iter()
        .map(|&gamma| PolicyParams::Bobw { sigma, epsilon, beta, gamma })
        .collect();
    let runs = run_batch(&sweep, env)?;
    Ok(gammas
        .iter()
        .zip(runs)
        .map(|(&gamma, run)| ParetoPoint {
            gamma,
            mean_regret: run.aggregate.mean_regret,
            failure_probability: run.aggregate.failure_probability,
            run,
        })
        .collect())
}

#[derive(Serialize)]
struct TrialRow<'a> {
    schema_version: u32,
    algorithm: &'a str,
    params_json: &'a str,
    instance_label: &'a str,
    protocol: String,
    trial: u64,
    seed: u64,
    steps_used: u64,
    pseudo_regret: f64,
    realized_regret: Option<f64>,
    recommended_arm: usize,
    correct: bool,
    stopped_early: bool,
    capped: bool,
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    schema_version: u32,
    algorithm: &'a str,
    params_json: &'a str,
    instance_label: &'a str,
    protocol: String,
    n_trials: u64,
    mean_regret: f64,
    std_regret: f64,
    std_convention: &'static str,
    mean_realized_regret: Option<f64>,
    failure_count: u64,
    failure_probability: f64,
    mean_stop_time: f64,
    std_stop_time: f64,
    capped_count: u64,
}

fn params_json(params: &PolicyParams) -> Result<String> {
    serde_json::to_string(params).map_err(|e| BanditError::Serde(e.to_string()))
}

/// Per-trial CSV body.
pub fn trials_csv(runs: &[PolicyRun]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for run in runs {
        let meta = &run.aggregate.metadata;
        let pj = params_json(&meta.params)?;
        for r in &run.trials {
            w.serialize(TrialRow {
                schema_version: SCHEMA_VERSION,
                algorithm: &meta.algorithm,
                params_json: &pj,
                instance_label: &meta.instance_label,
                protocol: meta.protocol.to_string(),
                trial: r.trial,
                seed: r.seed,
                steps_used: r.steps_used,
                pseudo_regret: r.pseudo_regret,
                realized_regret: r.realized_regret,
                recommended_arm: r.recommended_arm,
                correct: r.correct,
                stopped_early: r.stopped_early,
                capped: r.capped,
            })
            .map_err(|e| BanditError::Serde(e.to_string()))?;
        }
    }
    w.into_inner().map_err(|e| BanditError::Serde(e.to_string()))
}

/// Aggregate CSV body, one row per policy.
pub fn aggregate_csv<'a>(aggregates: impl IntoIterator<Item = &'a AggregateResult>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for a in aggregates {
        let meta = &a.metadata;
        w.serialize(AggregateRow {
            schema_version: SCHEMA_VERSION,
            algorithm: &meta.algorithm,
            params_json: &params_json(&meta.params)?,
            instance_label: &meta.instance_label,
            protocol: meta.protocol.to_string(),
            n_trials: a.n_trials,
            mean_regret: a.mean_regret,
            std_regret: a.std_regret,
            std_convention: "population",
            mean_realized_regret: a.mean_realized_regret,
            failure_count: a.failure_count,
            failure_probability: a.failure_probability,
            mean_stop_time: a.mean_stop_time,
            std_stop_time: a.std_stop_time,
            capped_count: a.capped_count,
        })
        .map_err(|e| BanditError::Serde(e.to_string()))?;
    }
    w.into_inner().map_err(|e| BanditError::Serde(e.to_string()))
}

/// `prefix` with `suffix` appended to its file name.
pub fn output_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes `body` to a temporary file beside `path`; the caller persists it.
fn stage(path: &Path, body: &[u8]) -> Result<tempfile::NamedTempFile> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BanditError::io(dir, e))?;
    tmp.write_all(body).map_err(|e| BanditError::io(tmp.path(), e))?;
    Ok(tmp)
}

/// Writes `<prefix>.trials.csv` and `<prefix>.agg.csv`. Both files are
/// staged first, so a failure leaves neither half-written.
pub fn write_outputs(prefix: &Path, runs: &[PolicyRun]) -> Result<(PathBuf, PathBuf)> {
    let trials_path = output_path(prefix, ".trials.csv");
    let agg_path = output_path(prefix, ".agg.csv");
    let trials = stage(&trials_path, &trials_csv(runs)?)?;
    let agg = stage(&agg_path, &aggregate_csv(runs.iter().map(|r| &r.aggregate))?)?;
    trials
        .persist(&trials_path)
        .map_err(|e| BanditError::io(&trials_path, e.error))?;
    if let Err(e) = agg.persist(&agg_path) {
        let _ = fs::remove_file(&trials_path);
        return Err(BanditError::io(&agg_path, e.error));
    }
    Ok((trials_path, agg_path))
}
