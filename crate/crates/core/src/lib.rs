//! Scale-free adversarial multi-armed bandits.
//!
//! The centerpiece is a bandit policy that needs to know nothing about the
//! losses it will face — not their scale, not their sign, not the horizon.
//! It combines log-barrier-regularized follow-the-regularized-leader with
//! an adaptive learning rate driven by observed mixability gaps,
//! uniform-mixture sampling, importance-weighted loss estimates, and a
//! choice of two exploration schedules (time-decaying or loss-driven).
//!
//! The supporting layers are exposed as ordinary library modules:
//!
//! - [`potential`] — potential functions, associated Legendre functions and
//!   duals, Bregman and mixed-Bregman divergences, secant-slope local-norm
//!   lower bounds;
//! - [`simplex`] — the scalar normalization solves behind FTRL iterates and
//!   exact mixability gaps;
//! - [`ftrl`] — the adaptive-rate full-information engine plus runnable
//!   verifications of its exact regret decomposition and closed-form
//!   regret inequalities;
//! - [`bandit`] — the scale-free policy and a fixed-scale Exp3 baseline;
//! - [`adversary`] — seeded oblivious loss-sequence generators and norm
//!   statistics;
//! - [`experiment`] — replicated regret experiments with CSV/TOML output;
//! - [`checks`] — the deterministic verification battery behind
//!   `sfmab verify` and the acceptance suite.
//!
//! Playing the policy by hand takes three lines; the same seed always
//! reproduces the same trace:
//!
//! ```
//! use sfmab::{Exploration, ScaleFreeBandit};
//!
//! let mut policy = ScaleFreeBandit::new(3, Exploration::Adaptive, 42)?;
//! for losses in [[0.2, 1.0, -5.0], [0.1, 0.9, 40.0]] {
//!     let round = policy.play_round(&losses)?;
//!     assert!(round.gamma_after <= round.gamma_before);
//! }
//! # Ok::<(), sfmab::Error>(())
//! ```

pub mod adversary;
pub mod bandit;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod ftrl;
pub mod potential;
pub mod simplex;
mod solver;

pub use adversary::{generate, norms, AdversaryConfig, AdversaryKind, LossMatrix, LossNorms};
pub use bandit::{
    iw_estimate, sampling_distribution, Exp3, Exploration, IwEstimate, Policy, ScaleFreeBandit,
};
pub use error::{Error, Result};
pub use experiment::{
    emit, run_experiment, ExperimentConfig, ExperimentResult, PolicySpec, RegretSummary,
    RoundRecord, SeedTrace,
};
pub use ftrl::{
    verify_adaftrl_bound, verify_regret_equality, verify_summation_lemma, ComparatorTerm,
    FtrlState, FullInfoTrace, TraceRound,
};
pub use potential::{
    bregman, dual_bregman, exponential_unit_certificate, log_barrier_unit_certificate, Exponential,
    LogBarrier, LowerBoundCertificate, Potential, Regularizer,
};
pub use simplex::{
    ftrl_iterate, log_barrier_gap_bound, mixability_gap, solve_lambda, CumulativeLoss, GapSolution,
    SimplexPoint,
};
