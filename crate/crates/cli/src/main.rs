//! `sfmab` — run scale-free bandit experiments, verify the math stack, and
//! benchmark the per-round solver cost.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sfmab::adversary::{AdversaryConfig, AdversaryKind};
use sfmab::bandit::Exploration;
use sfmab::checks;
use sfmab::experiment::{emit, run_experiment, ExperimentConfig, PolicySpec};

/// Environment variable holding the default output directory for `run`.
const OUT_DIR_ENV: &str = "SFMAB_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "sfmab",
    version,
    about = "Scale-free adversarial multi-armed bandit simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a seeded, replicated regret experiment and write summary + traces.
    Run(RunArgs),
    /// Run the verification battery; nonzero exit on any contract violation.
    Verify(VerifyArgs),
    /// Time the per-round solver operations.
    Bench(BenchArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML config file; command-line flags take precedence over its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Policy: opt1 (non-adaptive exploration), opt2 (adaptive), exp3.
    #[arg(long)]
    policy: Option<String>,
    /// Adversary kind: bounded-uniform, bernoulli-gap, sparse-heavy,
    /// sign-mixed, drifting-best-arm.
    #[arg(long)]
    adversary: Option<String>,
    /// Number of arms n.
    #[arg(long)]
    arms: Option<usize>,
    /// Number of rounds T.
    #[arg(long)]
    rounds: Option<usize>,
    /// Mean gap of bernoulli-gap.
    #[arg(long)]
    gap: Option<f64>,
    /// Active coordinates per round for sparse-heavy.
    #[arg(long)]
    sparsity: Option<usize>,
    /// Magnitude for sparse-heavy / sign-mixed.
    #[arg(long)]
    magnitude: Option<f64>,
    /// Rotation period for drifting-best-arm.
    #[arg(long)]
    period: Option<usize>,
    /// Multiply the whole loss matrix by this factor.
    #[arg(long)]
    rescale: Option<f64>,
    /// Declared loss-scale bound G for the exp3 baseline.
    #[arg(long)]
    exp3_scale: Option<f64>,
    /// Seed of the loss-sequence generator.
    #[arg(long)]
    adversary_seed: Option<u64>,
    /// Explicit comma-separated player seeds (overrides --num-seeds).
    #[arg(long)]
    seeds: Option<String>,
    /// Use player seeds 0..N.
    #[arg(long)]
    num_seeds: Option<usize>,
    /// Output directory (default: $SFMAB_OUT_DIR or ./sfmab-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// The same knobs as [`RunArgs`], readable from a TOML file.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    policy: Option<String>,
    adversary: Option<String>,
    arms: Option<usize>,
    rounds: Option<usize>,
    gap: Option<f64>,
    sparsity: Option<usize>,
    magnitude: Option<f64>,
    period: Option<usize>,
    rescale: Option<f64>,
    exp3_scale: Option<f64>,
    adversary_seed: Option<u64>,
    seeds: Option<Vec<u64>>,
    num_seeds: Option<usize>,
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed of the deterministic battery.
    #[arg(long, default_value_t = 20260811)]
    seed: u64,
    /// Which suite to run: potential, simplex, ftrl, bandit, all.
    #[arg(long, default_value = "all")]
    group: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Arm count used by the timed operations.
    #[arg(long, default_value_t = 10)]
    arms: usize,
    /// Repetitions per operation.
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Bench(args) => bench(args),
    }
}

fn parse_seed_list(raw: &str) -> anyhow::Result<Vec<u64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {s:?}"))
        })
        .collect()
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    // Flags win over the file, the file over the defaults.
    let policy_name = args.policy.or(file.policy).unwrap_or_else(|| "opt2".into());
    let adversary_name = args
        .adversary
        .or(file.adversary)
        .unwrap_or_else(|| "bernoulli-gap".into());
    let arms = args.arms.or(file.arms).unwrap_or(10);
    let rounds = args.rounds.or(file.rounds).unwrap_or(1024);
    let gap = args.gap.or(file.gap).unwrap_or(0.3);
    let sparsity = args.sparsity.or(file.sparsity).unwrap_or(1);
    let magnitude = args.magnitude.or(file.magnitude).unwrap_or(1.0);
    let period = args.period.or(file.period).unwrap_or(64);
    let rescale = args.rescale.or(file.rescale);
    let exp3_scale = args.exp3_scale.or(file.exp3_scale).unwrap_or(1.0);
    let adversary_seed = args.adversary_seed.or(file.adversary_seed).unwrap_or(90);
    let seeds: Vec<u64> = match (&args.seeds, &file.seeds) {
        (Some(raw), _) => parse_seed_list(raw)?,
        (None, Some(list)) if args.num_seeds.is_none() => list.clone(),
        _ => {
            let n = args.num_seeds.or(file.num_seeds).unwrap_or(10);
            (0..n as u64).collect()
        }
    };
    let out_dir = args
        .out_dir
        .or(file.out_dir)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("sfmab-out"));

    let policy = match policy_name.as_str() {
        "opt1" | "non-adaptive" => PolicySpec::ScaleFreeNonAdaptive,
        "opt2" | "adaptive" => PolicySpec::ScaleFreeAdaptive,
        "exp3" => PolicySpec::Exp3 { scale: exp3_scale },
        other => bail!("unknown policy {other:?} (expected opt1, opt2 or exp3)"),
    };

    let mut kind = match adversary_name.as_str() {
        "bounded-uniform" => AdversaryKind::BoundedUniform,
        "bernoulli-gap" => AdversaryKind::BernoulliGap { gap },
        "sparse-heavy" => AdversaryKind::SparseHeavy {
            active: sparsity,
            magnitude,
        },
        "sign-mixed" => AdversaryKind::SignMixed { magnitude },
        "drifting-best-arm" => AdversaryKind::DriftingBestArm { period },
        other => bail!("unknown adversary {other:?}"),
    };
    if let Some(factor) = rescale {
        kind = AdversaryKind::Rescaled {
            factor,
            inner: Box::new(kind),
        };
    }

    let config = ExperimentConfig {
        policy,
        adversary: AdversaryConfig {
            kind,
            arms,
            horizon: rounds,
            seed: adversary_seed,
        },
        seeds,
    };

    let started = Instant::now();
    let result = run_experiment(&config)?;
    let elapsed = started.elapsed();
    let written = emit(&result, &out_dir)?;

    let s = &result.summary;
    println!("policy          {policy_name}");
    println!("adversary       {adversary_name} (n={arms}, T={rounds}, seed {adversary_seed})");
    println!("replicas        {} seeds", s.seeds.len());
    println!(
        "mean regret     {:.4} +/- {:.4}",
        s.mean_regret, s.std_error
    );
    println!(
        "norms           Linf {:.6}  L1 {:.4}  L2 {:.4}  Sinf {:.4}",
        s.norms.linf, s.norms.l1, s.norms.l2, s.norms.sinf
    );
    println!(
        "bound opt1      {:.4}  ratio {}",
        s.bound_nonadaptive,
        s.ratio_nonadaptive
            .map_or("n/a".into(), |r| format!("{r:.4}"))
    );
    println!(
        "bound opt2      {:.4}  ratio {}",
        s.bound_adaptive,
        s.ratio_adaptive.map_or("n/a".into(), |r| format!("{r:.4}"))
    );
    println!("elapsed         {elapsed:.2?}");
    println!(
        "wrote           {} and {} trace file(s) under {}",
        written[0].display(),
        written.len() - 1,
        out_dir.display()
    );
    Ok(())
}

fn verify(args: VerifyArgs) -> anyhow::Result<()> {
    let outcomes = match args.group.as_str() {
        "potential" => checks::potential_suite(args.seed),
        "simplex" => checks::simplex_suite(args.seed),
        "ftrl" => checks::ftrl_suite(args.seed),
        "bandit" => checks::bandit_suite(args.seed),
        "all" => checks::run_all(args.seed),
        other => bail!("unknown group {other:?} (expected potential, simplex, ftrl, bandit, all)"),
    };

    let mut failures = 0;
    for outcome in &outcomes {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag}  {:<28} {}", outcome.name, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    println!(
        "{} checks, {} failed (seed {})",
        outcomes.len(),
        failures,
        args.seed
    );
    if failures > 0 {
        std::process::exit(1);
    }
    Ok(())
}

fn bench(args: BenchArgs) -> anyhow::Result<()> {
    use sfmab::bandit::ScaleFreeBandit;
    use sfmab::potential::LogBarrier;
    use sfmab::simplex::{mixability_gap, solve_lambda, SimplexPoint};

    let n = args.arms;
    let reps = args.reps.max(1);
    anyhow::ensure!(n >= 2, "need at least two arms to benchmark");

    // Deterministic pseudo-random inputs; no RNG needed for timing.
    let wave = |i: usize, k: f64| ((i as f64) * k).sin();
    let theta: Vec<Vec<f64>> = (0..reps)
        .map(|r| (0..n).map(|i| 20.0 * wave(i + r, 0.7)).collect())
        .collect();

    let started = Instant::now();
    let mut sink = 0.0;
    for t in &theta {
        sink += solve_lambda(&LogBarrier, t)?;
    }
    let lambda_time = started.elapsed();

    let p = SimplexPoint::uniform(n);
    let losses: Vec<Vec<f64>> = (0..reps)
        .map(|r| (0..n).map(|i| 3.0 * wave(i + 7 * r, 0.31)).collect())
        .collect();
    let started = Instant::now();
    for l in &losses {
        sink += mixability_gap(&LogBarrier, &p, l, 0.5)?.value;
    }
    let gap_time = started.elapsed();

    let mut policy = ScaleFreeBandit::new(n, Exploration::Adaptive, 7)?;
    let started = Instant::now();
    for l in &losses {
        sink += policy.play_round(l)?.incurred;
    }
    let round_time = started.elapsed();

    let per = |d: std::time::Duration| d.as_nanos() as f64 / reps as f64;
    println!("n = {n}, {reps} repetitions per operation");
    println!("solve_lambda    {:>10.0} ns/op", per(lambda_time));
    println!("mixability_gap  {:>10.0} ns/op", per(gap_time));
    println!("play_round      {:>10.0} ns/op", per(round_time));
    // Defeat dead-code elimination of the timed loops.
    if sink.is_nan() {
        println!("{sink}");
    }
    Ok(())
}
