//! Command-line runner for the `gmeasure` experiments.
//!
//! Every subcommand accepts `--config FILE` (TOML, see `ExperimentConfig`);
//! flags given on the command line override the file. Exit codes: 0 on
//! success, 2 on config errors, 3 when an enumeration or block budget is
//! exceeded, 1 otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmeasure::criteria::VariationModel;
use gmeasure::experiment::{run, selftest, ExperimentConfig, ExperimentError, ExperimentKind};

#[derive(Parser)]
#[command(name = "gmeasure", version, about = "Numerical experiments on g-measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oscillation of L_g^n f and the invariant measure on window cylinders.
    Transfer(TransferArgs),
    /// Monte Carlo block coupling and enumerated d_n.
    Couple(CoupleArgs),
    /// Renewal sequence u_n and its limits.
    Renewal(RenewalArgs),
    /// Uniqueness criteria verdicts with evidence tables.
    Criteria(CriteriaArgs),
    /// d-bar bounds, renewal bound and Monte Carlo comparison.
    Pipeline(PipelineArgs),
    /// Small runs of every experiment with known answers.
    Selftest {
        /// Scratch directory [default: a fresh directory under the system temp dir]
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: out/<experiment>]
    #[arg(long)]
    output: Option<PathBuf>,
    /// Master seed (required by couple and pipeline)
    #[arg(long)]
    seed: Option<u64>,
    /// TOML model file
    #[arg(long)]
    model: Option<PathBuf>,
    /// Block schedule: const:B, explicit:b1,b2,... or geometric:L
    #[arg(long)]
    schedule: Option<String>,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    common: Common,
    /// Largest n [default: 50]
    #[arg(long)]
    n_max: Option<usize>,
    /// Surrogate memory for long-range models [default: 8]
    #[arg(long)]
    truncation: Option<usize>,
    /// f = indicator of this word at coordinates 0.. [default: 0]
    #[arg(long)]
    function: Option<String>,
}

#[derive(Args)]
struct MonteCarloArgs {
    /// Deepest coordinate -n [default: 64]
    #[arg(long)]
    depth: Option<usize>,
    /// Number of coupled trajectories [default: 1000]
    #[arg(long)]
    trajectories: Option<u64>,
    /// Tail of x on [1, L] [default: L copies of the first symbol]
    #[arg(long)]
    tail_x: Option<String>,
    /// Tail of y on [1, L] [default: L copies of the last symbol]
    #[arg(long)]
    tail_y: Option<String>,
    /// L for default tails and enumeration [default: 4]
    #[arg(long)]
    tail_len: Option<usize>,
}

#[derive(Args)]
struct CoupleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    mc: MonteCarloArgs,
    /// Enumerate d_n for n = 1..=N [default: 0]
    #[arg(long)]
    dn_blocks: Option<usize>,
}

#[derive(Args)]
struct RenewalArgs {
    #[command(flatten)]
    common: Common,
    /// d_1,...,d_K
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<f64>>,
    /// b_1,...,b_{K+1}
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<usize>>,
    #[arg(long)]
    k: Option<usize>,
    /// Last index of u [default: 50 B_{K+1}]
    #[arg(long)]
    n_max: Option<usize>,
    /// K values for the limit table [default: K]
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<usize>>,
}

#[derive(Args)]
struct CriteriaArgs {
    #[command(flatten)]
    common: Common,
    /// power_law:c,p | exponential:c,r | finite_range:memory,level
    /// [default: tabulated from --model]
    #[arg(long)]
    variation: Option<String>,
    /// Subset of hyp1,hyp2,hyp3,hyp5,thm_h [default: hyp1,hyp2,hyp3,hyp5]
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// [default: 0.1]
    #[arg(long)]
    epsilon: Option<f64>,
    /// [default: 2]
    #[arg(long)]
    lambda: Option<f64>,
    /// Tabulated profile length for --model [default: 32]
    #[arg(long)]
    profile_horizon: Option<usize>,
    /// Tabulate corollary bounds on d_n for n = 1..=N (needs --schedule) [default: 0]
    #[arg(long)]
    corollary_blocks: Option<usize>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    mc: MonteCarloArgs,
    /// Blocks with individual d_n bounds [default: 16]
    #[arg(long)]
    horizon: Option<usize>,
    /// [default: 2]
    #[arg(long)]
    lambda: Option<f64>,
    /// [default: 1,2,4,8]
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<usize>>,
    /// Also bound d_1..d_N by enumeration [default: 0]
    #[arg(long)]
    brute_force_blocks: Option<usize>,
    /// Compare coordinates n >= N with the bound [default: 32]
    #[arg(long)]
    compare_from: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn base(kind: ExperimentKind, c: Common) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &c.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(path)?;
            if cfg.experiment != kind {
                return Err(ExperimentError::Config(format!(
                    "experiment: config is for {:?}, not {kind:?}",
                    cfg.experiment
                )));
            }
            cfg
        }
        None => {
            let name = serde_json::to_value(kind).expect("kind serializes");
            ExperimentConfig::new(kind, PathBuf::from("out").join(name.as_str().unwrap_or("run")))
        }
    };
    set(&mut cfg.output, c.output);
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    if c.model.is_some() {
        cfg.model = None;
        cfg.model_file = c.model;
    }
    if c.schedule.is_some() {
        cfg.schedule = c.schedule;
    }
    Ok(cfg)
}

fn apply_mc(cfg: &mut ExperimentConfig, mc: MonteCarloArgs) {
    set(&mut cfg.couple.depth, mc.depth);
    set(&mut cfg.couple.trajectories, mc.trajectories);
    set(&mut cfg.couple.tail_x, mc.tail_x);
    set(&mut cfg.couple.tail_y, mc.tail_y);
    set(&mut cfg.couple.tail_len, mc.tail_len);
}

fn parse_variation(text: &str) -> Result<VariationModel, ExperimentError> {
    let bad = || ExperimentError::Config(format!("--variation: cannot parse {text:?}"));
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let vm = match (kind.trim(), nums.as_slice()) {
        ("power_law", &[c, p]) => VariationModel::PowerLaw { c, p },
        ("exponential", &[c, r]) => VariationModel::Exponential { c, r },
        ("finite_range", &[m, level]) if m >= 0.0 && m.fract() == 0.0 => {
            VariationModel::FiniteRange { memory: m as usize, level }
        }
        _ => return Err(bad()),
    };
    Ok(vm)
}

fn config(command: Command) -> Result<ExperimentConfig, ExperimentError> {
    Ok(match command {
        Command::Transfer(a) => {
            let mut cfg = base(ExperimentKind::Transfer, a.common)?;
            set(&mut cfg.transfer.n_max, a.n_max);
            set(&mut cfg.transfer.truncation, a.truncation);
            set(&mut cfg.transfer.function, a.function);
            cfg
        }
        Command::Couple(a) => {
            let mut cfg = base(ExperimentKind::Couple, a.common)?;
            apply_mc(&mut cfg, a.mc);
            set(&mut cfg.couple.dn_blocks, a.dn_blocks);
            cfg
        }
        Command::Renewal(a) => {
            let mut cfg = base(ExperimentKind::Renewal, a.common)?;
            set(&mut cfg.renewal.d, a.d);
            set(&mut cfg.renewal.b, a.b);
            set(&mut cfg.renewal.k, a.k);
            set(&mut cfg.renewal.n_max, a.n_max);
            set(&mut cfg.renewal.k_sweep, a.k_sweep);
            cfg
        }
        Command::Criteria(a) => {
            let mut cfg = base(ExperimentKind::Criteria, a.common)?;
            if let Some(v) = a.variation {
                cfg.criteria.variation = Some(parse_variation(&v)?);
            }
            set(&mut cfg.criteria.checks, a.checks);
            set(&mut cfg.criteria.epsilon, a.epsilon);
            set(&mut cfg.criteria.lambda, a.lambda);
            set(&mut cfg.criteria.profile_horizon, a.profile_horizon);
            set(&mut cfg.criteria.corollary_blocks, a.corollary_blocks);
            cfg
        }
        Command::Pipeline(a) => {
            let mut cfg = base(ExperimentKind::Pipeline, a.common)?;
            apply_mc(&mut cfg, a.mc);
            set(&mut cfg.pipeline.horizon, a.horizon);
            set(&mut cfg.pipeline.lambda, a.lambda);
            set(&mut cfg.pipeline.k_sweep, a.k_sweep);
            set(&mut cfg.pipeline.brute_force_blocks, a.brute_force_blocks);
            set(&mut cfg.pipeline.compare_from, a.compare_from);
            cfg
        }
        Command::Selftest { .. } => unreachable!("handled separately"),
    })
}

fn run_selftest(output: Option<PathBuf>) -> Result<bool, ExperimentError> {
    let dir = output.unwrap_or_else(|| {
        std::env::temp_dir().join(format!("gmeasure-selftest-{}", std::process::id()))
    });
    let results = selftest(&dir)?;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {} ({})", r.name, r.detail);
    }
    Ok(results.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Selftest { output } => run_selftest(output).map(|ok| if ok { 0 } else { 1 }),
        command => config(command).and_then(|cfg| {
            let manifest = run(&cfg)?;
            println!("{}", cfg.output.join("manifest.json").display());
            for (name, sum) in &manifest.outputs {
                println!("  {name}  {sum}");
            }
            Ok(0)
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
