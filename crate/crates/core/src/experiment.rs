//! Seeded, replicated regret experiments.
//!
//! An experiment pins one policy, one materialized loss sequence and a list
//! of player seeds. Each seed is an independent replica (replicas run in
//! parallel, results are merged in seed order, so output is deterministic);
//! regret is always measured against the best fixed arm on the *true*
//! losses, never on estimates. The summary reports the loss-sequence norms
//! and the two scale-free reference envelopes
//!
//! ```text
//! bound_nonadaptive = sqrt(n L2) + Linf sqrt(n T)
//! bound_adaptive    = sqrt(n L2) + Linf sqrt(n L1)
//! ```
//!
//! (leading terms only — no constants or logarithmic factors), together
//! with the regret/bound ratios.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::adversary::{generate, norms, AdversaryConfig, LossMatrix, LossNorms};
use crate::bandit::{Exp3, Exploration, Policy, ScaleFreeBandit};
use crate::error::{Error, Result};

/// Which policy an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PolicySpec {
    /// Scale-free policy with `γ_t = min(1/2, √(n/t))`.
    ScaleFreeNonAdaptive,
    /// Scale-free policy with the loss-driven exploration schedule.
    ScaleFreeAdaptive,
    /// Exponential weights tuned for a known horizon and scale bound.
    Exp3 { scale: f64 },
}

impl PolicySpec {
    pub fn build(&self, arms: usize, horizon: usize, seed: u64) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySpec::ScaleFreeNonAdaptive => {
                Box::new(ScaleFreeBandit::new(arms, Exploration::NonAdaptive, seed)?)
            }
            PolicySpec::ScaleFreeAdaptive => {
                Box::new(ScaleFreeBandit::new(arms, Exploration::Adaptive, seed)?)
            }
            PolicySpec::Exp3 { scale } => Box::new(Exp3::new(arms, horizon, *scale, seed)?),
        })
    }
}

/// One experiment: policy, adversary, player seeds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub policy: PolicySpec,
    pub adversary: AdversaryConfig,
    pub seeds: Vec<u64>,
}

/// Per-round trace entry of a single replica.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub arm: usize,
    /// True loss of the pulled arm.
    pub loss: f64,
    /// Exploration rate the round was sampled with (`γ_{t-1}`).
    pub gamma: f64,
    /// Learning rate in force when the round started (`η_{t-1}`).
    pub eta: f64,
    /// Cumulative incurred loss minus the best fixed arm so far.
    pub cum_regret: f64,
}

/// One replica's full trace and final regret.
#[derive(Debug, Clone)]
pub struct SeedTrace {
    pub seed: u64,
    pub regret: f64,
    pub records: Vec<RoundRecord>,
}

/// Aggregate results plus the configuration that produced them.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RegretSummary {
    pub policy: PolicySpec,
    pub adversary: AdversaryConfig,
    pub seeds: Vec<u64>,
    pub arms: usize,
    pub horizon: usize,
    pub mean_regret: f64,
    pub std_error: f64,
    pub per_seed_regret: Vec<f64>,
    pub norms: LossNorms,
    pub bound_nonadaptive: f64,
    pub bound_adaptive: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_nonadaptive: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_adaptive: Option<f64>,
}

/// Summary plus per-seed traces.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub summary: RegretSummary,
    pub traces: Vec<SeedTrace>,
}

fn run_seed(policy: &PolicySpec, matrix: &LossMatrix, seed: u64) -> Result<SeedTrace> {
    let arms = matrix.arms();
    let horizon = matrix.horizon();
    let mut player = policy.build(arms, horizon, seed)?;
    let mut records = Vec::with_capacity(horizon);
    let mut incurred_total = 0.0;
    let mut arm_totals = vec![0.0; arms];

    for t in 0..horizon {
        let row = matrix.row(t);
        let round = player.play(row)?;
        incurred_total += round.incurred;
        for (total, &l) in arm_totals.iter_mut().zip(row.iter()) {
            *total += l;
        }
        let best_so_far = arm_totals.iter().copied().fold(f64::INFINITY, f64::min);
        records.push(RoundRecord {
            t: t + 1,
            arm: round.arm,
            loss: round.incurred,
            gamma: round.gamma_before,
            eta: round.eta_before,
            cum_regret: incurred_total - best_so_far,
        });
    }

    let regret = records.last().map(|r| r.cum_regret).unwrap_or(0.0);
    Ok(SeedTrace {
        seed,
        regret,
        records,
    })
}

/// Reference envelopes evaluated on a norm profile.
pub fn reference_bounds(ns: &LossNorms, arms: usize, horizon: usize) -> (f64, f64) {
    let n = arms as f64;
    let t = horizon as f64;
    let head = (n * ns.l2).sqrt();
    (
        head + ns.linf * (n * t).sqrt(),
        head + ns.linf * (n * ns.l1).sqrt(),
    )
}

/// Run all replicas of an experiment and aggregate.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    if config.seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "experiment needs at least one seed".into(),
        ));
    }
    let matrix = generate(&config.adversary)?;
    let ns = norms(&matrix);

    let traces: Vec<SeedTrace> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(&config.policy, &matrix, seed))
        .collect::<Result<Vec<_>>>()?;

    let regrets: Vec<f64> = traces.iter().map(|t| t.regret).collect();
    let k = regrets.len() as f64;
    let mean = regrets.iter().sum::<f64>() / k;
    let std_error = if regrets.len() > 1 {
        let var = regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    } else {
        0.0
    };

    let (bound_nonadaptive, bound_adaptive) =
        reference_bounds(&ns, matrix.arms(), matrix.horizon());
    let ratio = |bound: f64| (bound > 0.0).then(|| mean / bound);

    let summary = RegretSummary {
        policy: config.policy,
        adversary: config.adversary.clone(),
        seeds: config.seeds.clone(),
        arms: matrix.arms(),
        horizon: matrix.horizon(),
        mean_regret: mean,
        std_error,
        per_seed_regret: regrets,
        norms: ns,
        bound_nonadaptive,
        bound_adaptive,
        ratio_nonadaptive: ratio(bound_nonadaptive),
        ratio_adaptive: ratio(bound_adaptive),
    };

    Ok(ExperimentResult { summary, traces })
}

/// Write `summary.toml` and one `trace_seed_<seed>.csv` per replica into
/// `out_dir` (created if missing). Returns the written paths, summary
/// first. Output is byte-identical across repeated invocations.
pub fn emit(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let summary_path = out_dir.join("summary.toml");
    let body = toml::to_string_pretty(&result.summary)
        .map_err(|e| Error::InvalidParameter(format!("summary not serializable: {e}")))?;
    let mut file = std::fs::File::create(&summary_path).map_err(|source| Error::Io {
        path: summary_path.clone(),
        source,
    })?;
    file.write_all(body.as_bytes())
        .map_err(|source| Error::Io {
            path: summary_path.clone(),
            source,
        })?;
    written.push(summary_path);

    for trace in &result.traces {
        let path = out_dir.join(format!("trace_seed_{}.csv", trace.seed));
        let csv_err = |source: csv::Error| Error::Csv {
            path: path.clone(),
            source,
        };
        let mut writer = csv::Writer::from_path(&path).map_err(csv_err)?;
        writer
            .write_record(["t", "arm", "loss", "gamma", "eta", "cum_regret"])
            .map_err(csv_err)?;
        for r in &trace.records {
            writer
                .write_record([
                    r.t.to_string(),
                    r.arm.to_string(),
                    r.loss.to_string(),
                    r.gamma.to_string(),
                    r.eta.to_string(),
                    r.cum_regret.to_string(),
                ])
                .map_err(csv_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }

    Ok(written)
}
