use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use bobw_core::data::{load_movielens_with_variance, load_pkis2};
use bobw_core::hard_instances::{adversarial_clipped_family, bern_family, gauss_family, AdversarialInstance};
use bobw_core::harness::{
    aggregate_csv, output_path, pareto_sweep, run_batch, Environment, ExperimentConfig, PolicyRun, Protocol,
    SCHEMA_VERSION,
};
use bobw_core::instance::{save_instance, GapProfile, InstanceSpec};
use bobw_core::theory::{
    baseline_bounds, bobw_failure_bound, bobw_regret_bound_explicit, gamma_interval, pareto_lower_bounds,
    BoundInputs, BoundKind, ParetoKind,
};
use bobw_core::{gap_profile, hardness, BanditError, PolicyParams, RngStream};
use serde_json::{json, Value};

use crate::parse::{self, show};
use crate::{
    Algo, BoundsArgs, Command, DatasetArgs, FamilyArg, GammaIntervalArgs, HardnessArgs, LowerBoundArgs,
    ParetoArgs, RunArgs, SimulateArgs, Source,
};

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Flag combinations clap cannot check on its own.
    Usage(String),
    Domain(BanditError),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<BanditError> for Failure {
    fn from(e: BanditError) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Hardness(a) => hardness_cmd(a),
        Command::GammaInterval(a) => gamma_interval_cmd(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Pareto(a) => pareto_cmd(a),
        Command::LowerBound(a) => lower_bound_cmd(a),
        Command::Dataset(a) => dataset_cmd(a),
    }
}

fn write_file(path: &Path, body: &[u8]) -> Outcome {
    let mut f = fs::File::create(path).map_err(|e| BanditError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    f.write_all(body).map_err(|e| {
        Failure::Domain(BanditError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

/// Writes `<prefix>.meta.json` with the resolved configuration.
fn write_meta(prefix: &Path, command: &str, resolved: Value) -> Outcome {
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let meta = json!({
        "command": command,
        "argv": std::env::args().collect::<Vec<_>>(),
        "schema_version": SCHEMA_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix": created,
        "resolved": resolved,
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| BanditError::Serde(e.to_string()))?;
    write_file(&output_path(prefix, ".meta.json"), (text + "\n").as_bytes())
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Domain(BanditError::Serde(e.to_string())))
}

fn hardness_cmd(a: HardnessArgs) -> Outcome {
    let profile = match (&a.means, &a.instance) {
        (Some(means), _) => GapProfile::from_means(means)?,
        (None, Some(spec)) => gap_profile(&parse::instance(spec)?)?,
        (None, None) => return Err(usage("give --means or --instance")),
    };
    let h = hardness(&profile, a.p)?;
    println!("arms={}", profile.num_arms());
    println!("optimal_arm={}", profile.optimal_arm);
    println!("delta={}", show(profile.min_gap));
    println!("H1={}", show(h.h1));
    println!("H2={}", show(h.h2));
    if let (Some(p), Some(hp), Some(cp)) = (h.p, h.hp_prime, h.cp) {
        println!("p={}", show(p));
        println!("Hp_prime={}", show(hp));
        println!("Cp={}", show(cp));
    }
    if profile.unit_gap_violated {
        eprintln!("warning: some gap exceeds 1; the guarantees assume gaps in [0, 1]");
    }
    Ok(())
}

fn gamma_interval_cmd(a: GammaIntervalArgs) -> Outcome {
    if a.t.is_empty() {
        return Err(usage("give at least one horizon with --T"));
    }
    let h2 = a.h2.unwrap_or((a.l as f64 - 1.0) / (a.delta * a.delta));
    let mut body = String::from("T,lo,hi,empty\n");
    for &t in &a.t {
        let iv = gamma_interval(a.l, a.sigma, t as f64, a.eps, a.beta, a.delta, h2)?;
        body.push_str(&format!("{t},{},{},{}\n", iv.lo, iv.hi, iv.is_empty()));
    }
    print!("{body}");
    if let Some(prefix) = &a.out {
        write_file(&output_path(prefix, ".csv"), body.as_bytes())?;
        let resolved = json!({
            "L": a.l, "delta_lower": a.delta, "h2_upper": h2, "epsilon": a.eps,
            "beta": a.beta, "sigma": a.sigma, "T": a.t,
        });
        write_meta(prefix, "gamma-interval", resolved)?;
    }
    Ok(())
}

enum Requested {
    Baseline(BoundKind),
    Pareto(ParetoKind, &'static str),
    BobwFailure,
    BobwRegret,
}

const PARETO_NAMES: [(&str, ParetoKind); 4] = [
    ("pareto_b1", ParetoKind::B1),
    ("pareto_b2", ParetoKind::B2),
    ("pareto_b1_prime", ParetoKind::B1Prime),
    ("pareto_b2_prime", ParetoKind::B2Prime),
];

fn requested(name: &str) -> Result<Requested, Failure> {
    match name {
        "bobw_failure" => Ok(Requested::BobwFailure),
        "bobw_regret" => Ok(Requested::BobwRegret),
        _ => {
            if let Some(&(n, k)) = PARETO_NAMES.iter().find(|(n, _)| *n == name) {
                return Ok(Requested::Pareto(k, n));
            }
            name.parse::<BoundKind>()
                .map(Requested::Baseline)
                .map_err(|_| usage(format!("unknown bound kind {name:?} for --kind")))
        }
    }
}

fn all_requested() -> Vec<Requested> {
    let mut all = vec![Requested::BobwFailure, Requested::BobwRegret];
    all.extend(BoundKind::ALL.iter().map(|&k| Requested::Baseline(k)));
    all.extend(PARETO_NAMES.iter().map(|&(n, k)| Requested::Pareto(k, n)));
    all
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> Result<T, BanditError> {
    v.ok_or_else(|| BanditError::InvalidParameter(format!("{what} needs --{flag}")))
}

/// `(name, value, vacuous, condition note)` of one requested bound.
fn evaluate(req: &Requested, inputs: &BoundInputs) -> Result<(String, f64, bool, String), BanditError> {
    let arms = || {
        inputs
            .l
            .or(inputs.gaps.as_ref().map(|g| g.len() + 1))
            .ok_or_else(|| BanditError::InvalidParameter("needs --L or --gaps".into()))
    };
    Ok(match req {
        Requested::Baseline(k) => {
            let v = baseline_bounds(*k, inputs)?;
            (k.name().to_string(), v.value, v.vacuous, v.condition_violated.unwrap_or_default())
        }
        Requested::Pareto(k, name) => (name.to_string(), pareto_lower_bounds(*k, inputs)?, false, String::new()),
        Requested::BobwFailure => {
            let v = bobw_failure_bound(
                need(inputs.gamma, "gamma", "bobw_failure")?,
                need(inputs.epsilon, "eps", "bobw_failure")?,
                arms()?,
            );
            ("bobw_failure".into(), v, v >= 1.0, String::new())
        }
        Requested::BobwRegret => {
            let gaps = need(inputs.gaps.as_deref(), "gaps", "bobw_regret")?;
            let v = bobw_regret_bound_explicit(
                need(inputs.t, "T", "bobw_regret")?,
                arms()?,
                need(inputs.sigma, "sigma", "bobw_regret")?,
                need(inputs.epsilon, "eps", "bobw_regret")?,
                need(inputs.beta, "beta", "bobw_regret")?,
                need(inputs.gamma, "gamma", "bobw_regret")?,
                gaps,
            )?;
            ("bobw_regret".into(), v, false, String::new())
        }
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn bounds_cmd(a: BoundsArgs) -> Outcome {
    let inputs = BoundInputs {
        t: a.t,
        l: a.l,
        sigma: a.sigma,
        epsilon: a.eps,
        beta: a.beta,
        gamma: a.gamma,
        gaps: a.gaps,
        h2: a.h2,
        delta_lower: a.delta_lower,
        h2_upper: a.h2_upper,
        r_bar: a.r_bar,
        v_bar: a.v_bar,
        phi: a.phi,
        psi: a.psi,
        alpha: a.alpha,
        delta: a.delta,
        eta: a.eta,
        p: a.p,
        empirical_gap: a.empirical_gap,
    };
    let everything = a.kind.trim() == "all";
    let kinds = if everything {
        all_requested()
    } else {
        a.kind.split(',').map(|k| requested(k.trim())).collect::<Result<_, _>>()?
    };
    let mut body = String::from("kind,value,vacuous,condition_violated\n");
    for req in &kinds {
        match evaluate(req, &inputs) {
            Ok((name, value, vacuous, note)) => {
                body.push_str(&format!("{name},{value},{vacuous},{}\n", csv_field(&note)));
            }
            // with `all`, bounds lacking an input are skipped rather than fatal
            Err(BanditError::InvalidParameter(msg)) if everything => log::info!("skipped: {msg}"),
            Err(e) => return Err(e.into()),
        }
    }
    print!("{body}");
    if let Some(prefix) = &a.out {
        write_file(&output_path(prefix, ".csv"), body.as_bytes())?;
        write_meta(prefix, "bounds", to_value(&inputs)?)?;
    }
    Ok(())
}

fn environment(run: &RunArgs) -> Result<Environment, Failure> {
    match (&run.instance, &run.table) {
        (Some(spec), None) => Ok(parse::instance(spec)?.into()),
        (None, Some(path)) => {
            let label = format!("table:{}", path.display());
            Ok(AdversarialInstance::read_csv(path, label)?.into())
        }
        _ => Err(usage("give exactly one of --instance and --table")),
    }
}

fn horizon(run: &RunArgs, env: &Environment) -> Result<u64, Failure> {
    match (run.t, env) {
        (Some(t), _) => Ok(t),
        (None, Environment::Adversarial(a)) => Ok(a.horizon() as u64),
        (None, Environment::Stochastic(_)) => Err(usage("--T is required for stochastic instances")),
    }
}

fn environment_json(env: &Environment) -> Result<Value, Failure> {
    match env {
        Environment::Stochastic(i) => to_value(&InstanceSpec::from_instance(i)?),
        Environment::Adversarial(a) => Ok(json!({
            "table": a.label(), "arms": a.num_arms(), "horizon": a.horizon(),
        })),
    }
}

fn finish_run(command: &str, config: &ExperimentConfig, env: &Environment, runs: &[PolicyRun]) -> Outcome {
    let body = aggregate_csv(runs.iter().map(|r| &r.aggregate))?;
    std::io::stdout()
        .write_all(&body)
        .map_err(|e| usage(format!("cannot write to stdout: {e}")))?;
    if let Some(prefix) = &config.output {
        let resolved = json!({ "config": to_value(config)?, "environment": environment_json(env)? });
        write_meta(prefix, command, resolved)?;
    }
    Ok(())
}

fn experiment(run: &RunArgs, policies: Vec<PolicyParams>, protocol: Protocol) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(policies, protocol, run.trials, run.seed);
    config.workers = run.workers;
    config.output = run.out.clone();
    config
}

fn simulate_cmd(a: SimulateArgs) -> Outcome {
    let env = environment(&a.run)?;
    let list = |v: &Option<Vec<f64>>, flag: &str| {
        v.clone().ok_or_else(|| usage(format!("--algo {:?} needs --{flag}", a.algo)))
    };
    let policies: Vec<PolicyParams> = match a.algo {
        Algo::Bobw => list(&a.gamma, "gamma")?
            .into_iter()
            .map(|gamma| PolicyParams::Bobw {
                sigma: a.sigma,
                epsilon: a.eps,
                beta: a.beta,
                gamma,
            })
            .collect(),
        Algo::UcbE => list(&a.a, "a")?.into_iter().map(|a| PolicyParams::UcbE { a }).collect(),
        Algo::Sh => vec![PolicyParams::SequentialHalving],
        Algo::Exp3p => {
            let eta = a.eta.ok_or_else(|| usage("--algo exp3p needs --eta"))?;
            list(&a.gamma, "gamma")?
                .into_iter()
                .map(|gamma| PolicyParams::Exp3P { gamma, eta })
                .collect()
        }
        Algo::UpAdv => vec![PolicyParams::UpAdv],
        Algo::UcbAlpha => list(&a.alpha, "alpha")?
            .into_iter()
            .map(|alpha| PolicyParams::UcbAlpha { alpha, delta: a.delta })
            .collect(),
    };
    let protocol = if a.algo == Algo::UcbAlpha {
        let cap = match (a.step_cap, a.run.t, &env) {
            (Some(c), _, _) => c,
            (None, Some(t), Environment::Stochastic(_)) => t.saturating_mul(100),
            (None, _, Environment::Adversarial(table)) => table.horizon() as u64,
            (None, None, _) => return Err(usage("--algo ucb-alpha needs --T or --step-cap")),
        };
        Protocol::FixedConfidence {
            delta: a.delta,
            step_cap: cap,
        }
    } else {
        Protocol::FixedBudget {
            horizon: horizon(&a.run, &env)?,
        }
    };
    let config = experiment(&a.run, policies, protocol);
    let runs = run_batch(&config, &env)?;
    finish_run("simulate", &config, &env, &runs)
}

fn pareto_cmd(a: ParetoArgs) -> Outcome {
    let env = environment(&a.run)?;
    let protocol = Protocol::FixedBudget {
        horizon: horizon(&a.run, &env)?,
    };
    let config = experiment(&a.run, Vec::new(), protocol);
    let template = PolicyParams::Bobw {
        sigma: a.sigma,
        epsilon: a.eps,
        beta: a.beta,
        gamma: a.gammas.first().copied().unwrap_or(0.5),
    };
    let points = pareto_sweep(&config, template, &a.gammas, &env)?;
    println!("gamma,mean_regret,std_regret,failure_probability");
    for p in &points {
        println!("{},{},{},{}", p.gamma, p.mean_regret, p.run.aggregate.std_regret, p.failure_probability);
    }
    if let Some(prefix) = &config.output {
        let mut sweep = config.clone();
        sweep.policies = points.iter().map(|p| p.run.aggregate.metadata.params).collect();
        let resolved = json!({ "config": to_value(&sweep)?, "environment": environment_json(&env)? });
        write_meta(prefix, "pareto", resolved)?;
    }
    Ok(())
}

fn offsets(d: &Option<Vec<f64>>, l: usize) -> Result<Vec<f64>, Failure> {
    match d.as_deref() {
        None => Err(usage("--d is required for this family")),
        Some([single]) => Ok(vec![*single; l.saturating_sub(1)]),
        Some(list) => Ok(list.to_vec()),
    }
}

fn lower_bound_cmd(a: LowerBoundArgs) -> Outcome {
    let mut written: Vec<PathBuf> = Vec::new();
    let resolved = match a.family {
        FamilyArg::Bern | FamilyArg::Gauss => {
            let d = offsets(&a.d, a.l)?;
            let family = if a.family == FamilyArg::Bern {
                bern_family(a.l, &d, a.b)?
            } else {
                let sigma = a.sigma.ok_or_else(|| usage("--family gauss needs --sigma"))?;
                gauss_family(a.l, &d, sigma)?
            };
            for (k, inst) in family.iter().enumerate() {
                let path = output_path(&a.out, &format!(".instance{}.json", k + 1));
                save_instance(&path, inst)?;
                written.push(path);
            }
            json!({ "family": format!("{:?}", a.family).to_lowercase(), "L": a.l, "d": d, "b": a.b, "sigma": a.sigma })
        }
        FamilyArg::Adversarial => {
            let t = a.t.ok_or_else(|| usage("--family adversarial needs --T"))?;
            let eps = a.eps.ok_or_else(|| usage("--family adversarial needs --eps"))?;
            let sigma = a.sigma.ok_or_else(|| usage("--family adversarial needs --sigma"))?;
            if a.instance == 0 || a.instance > a.l {
                return Err(usage(format!("--instance must lie in 1..={}", a.l)));
            }
            let rng = RngStream::new(a.seed, 0);
            let table = adversarial_clipped_family(a.l, t as usize, eps, sigma, a.instance - 1, &rng)?;
            let path = output_path(&a.out, ".table.csv");
            table.write_csv(&path)?;
            println!("best_arm={}", table.best_arm());
            println!("min_empirical_gap={}", show(table.min_empirical_gap()));
            written.push(path);
            json!({
                "family": "adversarial", "L": a.l, "T": t, "eps": eps, "sigma": sigma,
                "instance": a.instance, "seed": a.seed,
            })
        }
    };
    for p in &written {
        println!("wrote {}", p.display());
    }
    write_meta(&a.out, "lower-bound", resolved)
}

fn dataset_cmd(a: DatasetArgs) -> Outcome {
    let inst = match a.source {
        Source::Movielens => load_movielens_with_variance(&a.path, a.min_ratings, a.variance)?,
        Source::Pkis2 => {
            let kinase = a.kinase.as_deref().ok_or_else(|| usage("pkis2 needs --kinase"))?;
            load_pkis2(&a.path, kinase, a.raw_scale)?
        }
    };
    let profile = gap_profile(&inst)?;
    let h = hardness(&profile, None)?;
    if profile.unit_gap_violated {
        eprintln!("warning: some gap exceeds 1; the guarantees assume gaps in [0, 1]");
    }
    let best = inst
        .arm_names()
        .map_or_else(|| profile.optimal_arm.to_string(), |n| n[profile.optimal_arm].clone());
    println!("label={}", inst.label);
    println!("arms={}", inst.num_arms());
    println!("best_arm={best}");
    println!("best_mean={}", show(inst.means()[profile.optimal_arm]));
    println!("delta={}", show(profile.min_gap));
    println!("H2={}", show(h.h2));
    if let Some(prefix) = &a.out {
        save_instance(&output_path(prefix, ".json"), &inst)?;
        let resolved = json!({
            "source": format!("{:?}", a.source).to_lowercase(), "path": a.path,
            "min_ratings": a.min_ratings, "variance": a.variance,
            "kinase": a.kinase, "raw_scale": a.raw_scale,
        });
        write_meta(prefix, "dataset", resolved)?;
    }
    Ok(())
}
