//! `bobw`: instance hardness, bound evaluation, simulation and data import.

mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bobw", version, about = "Fixed-budget bandit simulation and bound calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gaps and hardness quantities of an instance.
    Hardness(HardnessArgs),
    /// The admissible BoBW gamma interval for one or more horizons.
    GammaInterval(GammaIntervalArgs),
    /// Closed-form bound values as CSV.
    Bounds(BoundsArgs),
    /// Monte-Carlo runs of one or more policies.
    Simulate(SimulateArgs),
    /// BoBW regret / failure trade-off over a gamma grid.
    Pareto(ParetoArgs),
    /// Writes lower-bound instance families.
    LowerBound(LowerBoundArgs),
    /// Builds an instance from a ratings or inhibition dataset.
    Dataset(DatasetArgs),
}

#[derive(Debug, Args)]
struct HardnessArgs {
    /// Arm means, e.g. 0.5,0.45
    #[arg(long, value_delimiter = ',', value_parser = parse::real, conflicts_with = "instance", required_unless_present = "instance")]
    means: Option<Vec<f64>>,
    /// Instance shorthand `bern:L=..,delta=..` or instance file
    #[arg(long)]
    instance: Option<String>,
    /// Exponent for H'_p and C_p
    #[arg(long, value_parser = parse::real)]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct GammaIntervalArgs {
    #[arg(long = "L", alias = "arms", value_parser = parse::arms)]
    l: usize,
    /// Lower bound on the minimal gap
    #[arg(long, value_parser = parse::real)]
    delta: f64,
    /// Upper bound on H2 [default: (L-1)/delta^2]
    #[arg(long, value_parser = parse::real)]
    h2: Option<f64>,
    #[arg(long, alias = "epsilon", default_value = "0.01", value_parser = parse::real)]
    eps: f64,
    #[arg(long, default_value = "e", value_parser = parse::real)]
    beta: f64,
    #[arg(long, default_value = "0.5", value_parser = parse::real)]
    sigma: f64,
    /// Horizons, comma separated
    #[arg(long = "T", alias = "horizon", value_delimiter = ',', value_parser = parse::count)]
    t: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Bound kinds, comma separated, or `all`
    #[arg(long, default_value = "all")]
    kind: String,
    #[arg(long = "T", value_parser = parse::real)]
    t: Option<f64>,
    #[arg(long = "L", value_parser = parse::arms)]
    l: Option<usize>,
    #[arg(long, value_parser = parse::real)]
    sigma: Option<f64>,
    #[arg(long, alias = "epsilon", value_parser = parse::real)]
    eps: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    beta: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    gamma: Option<f64>,
    /// Suboptimal gaps, comma separated
    #[arg(long, value_delimiter = ',', value_parser = parse::real)]
    gaps: Option<Vec<f64>>,
    #[arg(long, value_parser = parse::real)]
    h2: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    delta_lower: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    h2_upper: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    r_bar: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    v_bar: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    phi: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    psi: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    delta: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    eta: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    p: Option<f64>,
    #[arg(long, value_parser = parse::real)]
    empirical_gap: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Bobw,
    #[value(alias = "ucbe")]
    UcbE,
    #[value(alias = "sequential-halving")]
    Sh,
    #[value(alias = "exp3.p")]
    Exp3p,
    UpAdv,
    #[value(alias = "ucb_alpha")]
    UcbAlpha,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Instance shorthand `bern:L=..,delta=..` or instance file
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    instance: Option<String>,
    /// Adversarial reward table (t,arm,reward CSV)
    #[arg(long)]
    table: Option<PathBuf>,
    /// Budget; also sets the default step cap of fixed-confidence runs
    #[arg(long = "T", alias = "horizon", value_parser = parse::count)]
    t: Option<u64>,
    #[arg(long, default_value = "100", value_parser = parse::count)]
    trials: u64,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
    /// Worker threads [default: all cores]
    #[arg(long, env = "BOBW_WORKERS")]
    workers: Option<usize>,
    /// Output prefix for .trials.csv, .agg.csv and .meta.json
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    /// BoBW or Exp3.P gamma; a comma list runs a sweep
    #[arg(long, value_delimiter = ',', value_parser = parse::real)]
    gamma: Option<Vec<f64>>,
    #[arg(long, alias = "epsilon", default_value = "0.01", value_parser = parse::real)]
    eps: f64,
    #[arg(long, default_value = "e", value_parser = parse::real)]
    beta: f64,
    /// BoBW scale [default: the instance's sub-Gaussian scale]
    #[arg(long, value_parser = parse::real)]
    sigma: Option<f64>,
    /// UCB-E exploration constant(s)
    #[arg(long, value_delimiter = ',', value_parser = parse::real)]
    a: Option<Vec<f64>>,
    /// Exp3.P learning rate
    #[arg(long, value_parser = parse::real)]
    eta: Option<f64>,
    /// UCB_alpha exploration exponent(s)
    #[arg(long, value_delimiter = ',', value_parser = parse::real)]
    alpha: Option<Vec<f64>>,
    /// UCB_alpha confidence level
    #[arg(long, default_value = "0.01", value_parser = parse::real)]
    delta: f64,
    /// UCB_alpha step cap [default: 100 T]
    #[arg(long, value_parser = parse::count)]
    step_cap: Option<u64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    /// Ascending gamma grid
    #[arg(long, value_delimiter = ',', value_parser = parse::real)]
    gammas: Vec<f64>,
    #[arg(long, alias = "epsilon", default_value = "0.01", value_parser = parse::real)]
    eps: f64,
    #[arg(long, default_value = "e", value_parser = parse::real)]
    beta: f64,
    #[arg(long, value_parser = parse::real)]
    sigma: Option<f64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Bern,
    Gauss,
    Adversarial,
}

#[derive(Debug, Args)]
struct LowerBoundArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long = "L", value_parser = parse::arms)]
    l: usize,
    /// Offsets of arms 2..L; a single value is repeated
    #[arg(long, value_delimiter = ',', value_parser = parse::real)]
    d: Option<Vec<f64>>,
    /// Bernoulli reward scale
    #[arg(long, default_value = "1", value_parser = parse::real)]
    b: f64,
    #[arg(long, value_parser = parse::real)]
    sigma: Option<f64>,
    /// Adversarial horizon
    #[arg(long = "T", value_parser = parse::count)]
    t: Option<u64>,
    /// Adversarial offset
    #[arg(long, alias = "epsilon", value_parser = parse::real)]
    eps: Option<f64>,
    /// 1-based instance of the adversarial family
    #[arg(long, default_value = "1", value_parser = parse::arms)]
    instance: usize,
    #[arg(long, default_value = "0", value_parser = parse::count)]
    seed: u64,
    /// Output prefix
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Movielens,
    Pkis2,
}

#[derive(Debug, Args)]
struct DatasetArgs {
    #[arg(value_enum)]
    source: Source,
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value = "50000", value_parser = parse::count)]
    min_ratings: u64,
    /// Reward variance of MovieLens arms
    #[arg(long, default_value = "1", value_parser = parse::real)]
    variance: f64,
    #[arg(long)]
    kinase: Option<String>,
    #[arg(long, default_value = "100", value_parser = parse::real)]
    raw_scale: f64,
    /// Writes the instance description to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
