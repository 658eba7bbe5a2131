//! The scale-free bandit policy and its fixed-scale Exp3 baseline.
//!
//! The scale-free policy assembles three pieces around the adaptive-rate
//! log-barrier FTRL engine:
//!
//! 1. *Sampling*: mix the iterate with the uniform distribution,
//!    `p'_t = (1-γ_{t-1}) p_t + γ_{t-1}/n`, so every arm keeps probability
//!    at least `γ_{t-1}/n`.
//! 2. *Estimation*: the importance-weighted one-hot estimate
//!    `l̃_t = (l_t(i_t)/p'_t(i_t)) · e_{i_t}`, unbiased under `p'_t`.
//! 3. *Exploration schedule*: either the non-adaptive `min(1/2, √(n/t))`
//!    or the adaptive `γ_t = n / (2n + Σ_s Γ_s(γ_{s-1}))` with
//!    `Γ_t(γ) = γ|l_t(i_t)| / ((1-γ)p_t(i_t) + γ/n)`.
//!
//! Neither schedule needs the loss scale or the horizon. The Exp3 baseline,
//! by contrast, must be told an explicit bound `G` on `‖l_t‖_∞` and refuses
//! to continue when an observation violates it — that contrast is the point
//! of keeping it around.
//!
//! All randomness comes from a per-instance seeded generator, so traces are
//! reproducible and replicas with distinct seeds share nothing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ftrl::FtrlState;
use crate::potential::LogBarrier;
use crate::simplex::SimplexPoint;

/// Exploration-rate schedule of the scale-free policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exploration {
    /// `γ_t = min(1/2, √(n/t))`.
    NonAdaptive,
    /// `γ_t = n / (2n + Σ_{s≤t} Γ_s(γ_{s-1}))`.
    Adaptive,
}

/// Importance-weighted estimate of one bandit observation.
///
/// Represents the one-hot vector `(raw_loss / prob) · e_arm` without
/// materializing it; [`IwEstimate::to_vector`] produces the dense view.
#[derive(Debug, Clone, PartialEq)]
pub struct IwEstimate {
    pub arm: usize,
    pub raw_loss: f64,
    pub prob: f64,
}

impl IwEstimate {
    /// The single nonzero coordinate `raw_loss / prob`.
    pub fn scaled(&self) -> f64 {
        self.raw_loss / self.prob
    }

    pub fn to_vector(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[self.arm] = self.scaled();
        v
    }
}

/// Mix an iterate with the uniform distribution:
/// `(1-γ)p + γ/n`, coordinates bounded below by `γ/n`.
pub fn sampling_distribution(p: &SimplexPoint, gamma: f64) -> Result<SimplexPoint> {
    if !(0.0..=0.5).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "exploration rate gamma = {gamma} must lie in [0, 1/2]"
        )));
    }
    let n = p.dim() as f64;
    SimplexPoint::new(p.iter().map(|&pi| (1.0 - gamma) * pi + gamma / n).collect())
}

/// Build the importance-weighted estimate of a single observed loss.
pub fn iw_estimate(arm: usize, raw_loss: f64, pprime: &SimplexPoint) -> Result<IwEstimate> {
    if arm >= pprime.dim() {
        return Err(Error::InvalidParameter(format!(
            "arm {arm} out of range for {} arms",
            pprime.dim()
        )));
    }
    if !raw_loss.is_finite() {
        return Err(Error::Domain(format!(
            "observed loss {raw_loss} must be finite"
        )));
    }
    let prob = pprime[arm];
    if prob <= 0.0 {
        return Err(Error::Domain(format!(
            "sampling probability of arm {arm} is {prob}; cannot importance-weight"
        )));
    }
    Ok(IwEstimate {
        arm,
        raw_loss,
        prob,
    })
}

/// Inverse-CDF sample from a simplex point.
fn sample_index(rng: &mut ChaCha8Rng, p: &SimplexPoint) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if r < acc {
            return i;
        }
    }
    p.dim() - 1
}

/// Everything one bandit round produced.
#[derive(Debug, Clone)]
pub struct BanditRound {
    /// 1-based round index.
    pub t: usize,
    pub arm: usize,
    /// True loss of the pulled arm (the only observed entry).
    pub incurred: f64,
    /// Exploration rate used to sample this round (`γ_{t-1}`).
    pub gamma_before: f64,
    pub gamma_after: f64,
    /// Learning rate the gap was charged at (`η_{t-1}`).
    pub eta_before: f64,
    pub eta_after: f64,
    /// Mixability gap of the estimate at the old rate.
    pub gap: f64,
    /// Iterate `p_t` the round started from.
    pub iterate: SimplexPoint,
    /// Sampling distribution `p'_t`.
    pub sampling: SimplexPoint,
    pub estimate: IwEstimate,
}

/// Common surface for policies driven by the experiment harness.
///
/// `play` receives the full true loss vector but must only ever look at the
/// coordinate of the arm it pulls.
pub trait Policy {
    fn arms(&self) -> usize;
    fn play(&mut self, true_loss: &[f64]) -> Result<BanditRound>;
}

/// The scale-free bandit policy: log-barrier AdaFTRL with uniform-mixture
/// sampling and importance weighting. Starts at `η_0 = n`, `γ_0 = 1/2`,
/// uniform first iterate.
#[derive(Debug, Clone)]
pub struct ScaleFreeBandit {
    ftrl: FtrlState<LogBarrier>,
    exploration: Exploration,
    gamma: f64,
    gamma_sum: f64,
    t: usize,
    rng: ChaCha8Rng,
}

impl ScaleFreeBandit {
    pub fn new(n: usize, exploration: Exploration, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one arm".into()));
        }
        Ok(Self {
            ftrl: FtrlState::new(LogBarrier, n, n as f64, 1.0)?,
            exploration,
            gamma: 0.5,
            gamma_sum: 0.0,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Current exploration rate `γ_t`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Current learning rate `η_t`.
    pub fn eta(&self) -> f64 {
        self.ftrl.eta()
    }

    /// Rounds played so far.
    pub fn round(&self) -> usize {
        self.t
    }

    /// Current FTRL iterate `p_{t+1}`.
    pub fn iterate(&self) -> &SimplexPoint {
        self.ftrl.current()
    }

    /// Advance the exploration schedule after observing `est` and return
    /// the new rate.
    ///
    /// Must be called once per round, *before* the FTRL update: the
    /// adaptive increment `Γ_t` is defined against the iterate the round
    /// was played from. [`ScaleFreeBandit::play_round`] enforces the order.
    pub fn update_gamma(&mut self, est: &IwEstimate) -> f64 {
        let n = self.ftrl.dim() as f64;
        self.t += 1;
        self.gamma = match self.exploration {
            Exploration::NonAdaptive => 0.5f64.min((n / self.t as f64).sqrt()),
            Exploration::Adaptive => {
                let p_ti = self.ftrl.current()[est.arm];
                let gamma = self.gamma;
                let increment = gamma * est.raw_loss.abs() / ((1.0 - gamma) * p_ti + gamma / n);
                self.gamma_sum += increment;
                n / (2.0 * n + self.gamma_sum)
            }
        };
        self.gamma
    }

    /// Play one round against the (unseen) true loss vector.
    pub fn play_round(&mut self, true_loss: &[f64]) -> Result<BanditRound> {
        let n = self.ftrl.dim();
        if true_loss.len() != n {
            return Err(Error::InvalidParameter(format!(
                "loss has {} coordinates, policy has {n} arms",
                true_loss.len()
            )));
        }
        if true_loss.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("loss vector must be finite".into()));
        }

        let gamma_before = self.gamma;
        let eta_before = self.ftrl.eta();
        let iterate = self.ftrl.current().clone();

        let sampling = sampling_distribution(&iterate, gamma_before)?;
        let arm = sample_index(&mut self.rng, &sampling);
        let incurred = true_loss[arm];
        let estimate = iw_estimate(arm, incurred, &sampling)?;

        let gamma_after = self.update_gamma(&estimate);
        let step = self.ftrl.step(&estimate.to_vector(n))?;

        Ok(BanditRound {
            t: self.t,
            arm,
            incurred,
            gamma_before,
            gamma_after,
            eta_before,
            eta_after: step.eta_after,
            gap: step.gap,
            iterate,
            sampling,
            estimate,
        })
    }
}

impl Policy for ScaleFreeBandit {
    fn arms(&self) -> usize {
        self.ftrl.dim()
    }

    fn play(&mut self, true_loss: &[f64]) -> Result<BanditRound> {
        self.play_round(true_loss)
    }
}

/// Exponential-weights baseline with a declared loss scale.
///
/// Tuned with the standard fixed-horizon rate `η = √(ln n / (T n)) / G`.
/// Observing any `|loss| > G` is a contract violation and aborts the run.
#[derive(Debug, Clone)]
pub struct Exp3 {
    log_weights: Vec<f64>,
    probs: SimplexPoint,
    eta: f64,
    scale: f64,
    t: usize,
    rng: ChaCha8Rng,
}

impl Exp3 {
    pub fn new(n: usize, horizon: usize, scale: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one arm".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be positive".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale bound G = {scale} must be positive and finite"
            )));
        }
        let nf = n as f64;
        let eta = if n == 1 {
            1.0
        } else {
            (nf.ln() / (horizon as f64 * nf)).sqrt() / scale
        };
        Ok(Self {
            log_weights: vec![0.0; n],
            probs: SimplexPoint::uniform(n),
            eta,
            scale,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Current (normalized, strictly positive) weight distribution.
    pub fn weights(&self) -> &SimplexPoint {
        &self.probs
    }

    pub fn play_round(&mut self, true_loss: &[f64]) -> Result<BanditRound> {
        let n = self.log_weights.len();
        if true_loss.len() != n {
            return Err(Error::InvalidParameter(format!(
                "loss has {} coordinates, policy has {n} arms",
                true_loss.len()
            )));
        }
        let dist = self.probs.clone();
        let arm = sample_index(&mut self.rng, &dist);
        let incurred = true_loss[arm];
        if !incurred.is_finite() {
            return Err(Error::Domain("observed loss must be finite".into()));
        }
        if incurred.abs() > self.scale {
            return Err(Error::ScaleViolation {
                observed: incurred,
                bound: self.scale,
            });
        }
        let estimate = iw_estimate(arm, incurred, &dist)?;

        // Exponential-weights update on the one-hot estimate, renormalized
        // in log space each round.
        self.log_weights[arm] -= self.eta * estimate.scaled();
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = self.log_weights.iter().map(|&w| (w - max).exp()).sum();
        let coords: Vec<f64> = self
            .log_weights
            .iter()
            .map(|&w| (w - max).exp() / total)
            .collect();
        for (lw, &c) in self.log_weights.iter_mut().zip(coords.iter()) {
            *lw = c.ln();
        }
        self.probs = SimplexPoint::new(coords)?;
        self.t += 1;

        Ok(BanditRound {
            t: self.t,
            arm,
            incurred,
            gamma_before: 0.0,
            gamma_after: 0.0,
            eta_before: self.eta,
            eta_after: self.eta,
            gap: 0.0,
            iterate: dist.clone(),
            sampling: dist,
            estimate,
        })
    }
}

impl Policy for Exp3 {
    fn arms(&self) -> usize {
        self.log_weights.len()
    }

    fn play(&mut self, true_loss: &[f64]) -> Result<BanditRound> {
        self.play_round(true_loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sampling_distribution_formula() {
        let p = SimplexPoint::new(vec![0.9, 0.1]).unwrap();
        let mixed = sampling_distribution(&p, 0.5).unwrap();
        assert!((mixed[0] - 0.7).abs() < 1e-15);
        assert!((mixed[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sampling_distribution_identity_and_fixed_point() {
        let p = SimplexPoint::new(vec![0.8, 0.2]).unwrap();
        let same = sampling_distribution(&p, 0.0).unwrap();
        assert_eq!(same.as_slice(), p.as_slice());
        let u = SimplexPoint::uniform(3);
        let still = sampling_distribution(&u, 0.4).unwrap();
        for &c in still.iter() {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(sampling_distribution(&p, 0.6).is_err());
    }

    #[test]
    fn iw_estimate_values() {
        let p = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        let est = iw_estimate(0, 2.0, &p).unwrap();
        assert_eq!(est.to_vector(2), vec![4.0, 0.0]);

        let p = SimplexPoint::new(vec![0.25, 0.75]).unwrap();
        let est = iw_estimate(1, -3.0, &p).unwrap();
        assert_eq!(est.to_vector(2), vec![0.0, -4.0]);

        let zero = iw_estimate(0, 0.0, &p).unwrap();
        assert_eq!(zero.to_vector(2), vec![0.0, 0.0]);
        assert!(iw_estimate(2, 1.0, &p).is_err());
    }

    #[test]
    fn iw_unbiasedness_exhaustive() {
        let p = SimplexPoint::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let loss = [1.5, -2.0, 0.0, 7.25];
        let mut expectation = [0.0; 4];
        for arm in 0..4 {
            let est = iw_estimate(arm, loss[arm], &p).unwrap();
            for (e, v) in expectation.iter_mut().zip(est.to_vector(4)) {
                *e += p[arm] * v;
            }
        }
        for (e, l) in expectation.iter().zip(loss.iter()) {
            assert!((e - l).abs() <= 1e-12);
        }
    }

    #[test]
    fn non_adaptive_gamma_schedule() {
        let mut policy = ScaleFreeBandit::new(4, Exploration::NonAdaptive, 0).unwrap();
        assert_eq!(policy.gamma(), 0.5);
        let p = SimplexPoint::uniform(4);
        let est = iw_estimate(0, 1.0, &p).unwrap();
        let mut last = 0.5;
        for t in 1..=64 {
            last = policy.update_gamma(&est);
            if t <= 4 {
                assert_eq!(last, 0.5, "gamma clipped while t <= n");
            }
        }
        assert!((last - 0.25).abs() < 1e-15, "sqrt(4/64) = 1/4");
    }

    #[test]
    fn adaptive_gamma_first_round_hand_value() {
        // n=2, uniform iterate, gamma0 = 1/2, |l| = 1:
        // increment = 0.5 / (0.25 + 0.25) = 1, gamma1 = 2/(4+1) = 0.4.
        let mut policy = ScaleFreeBandit::new(2, Exploration::Adaptive, 0).unwrap();
        let p = SimplexPoint::uniform(2);
        let est = iw_estimate(0, 1.0, &p).unwrap();
        let g = policy.update_gamma(&est);
        assert!((g - 0.4).abs() < 1e-15);
    }

    #[test]
    fn adaptive_gamma_stays_at_half_for_zero_losses() {
        let mut policy = ScaleFreeBandit::new(3, Exploration::Adaptive, 5).unwrap();
        for _ in 0..20 {
            let round = policy.play_round(&[0.0, 0.0, 0.0]).unwrap();
            assert_eq!(round.gamma_after, 0.5);
            assert_eq!(round.eta_after, 3.0);
            assert_eq!(round.incurred, 0.0);
        }
    }

    #[test]
    fn single_round_matches_component_composition() {
        let seed = 42;
        let mut policy = ScaleFreeBandit::new(2, Exploration::Adaptive, seed).unwrap();
        let loss = [1.0, 0.0];
        let round = policy.play_round(&loss).unwrap();

        // Replay the same round by hand with the same generator.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let iterate = SimplexPoint::uniform(2);
        let sampling = sampling_distribution(&iterate, 0.5).unwrap();
        let arm = sample_index(&mut rng, &sampling);
        let est = iw_estimate(arm, loss[arm], &sampling).unwrap();
        assert_eq!(round.arm, arm);
        assert_eq!(round.estimate, est);
        assert_eq!(round.incurred, loss[arm]);

        let mut engine = FtrlState::new(LogBarrier, 2, 2.0, 1.0).unwrap();
        let step = engine.step(&est.to_vector(2)).unwrap();
        assert_eq!(round.eta_after, step.eta_after);
        assert_eq!(round.gap, step.gap);
        for (a, b) in policy.iterate().iter().zip(engine.current().iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn identical_seeds_reproduce_traces() {
        let losses: Vec<Vec<f64>> = (0..30)
            .map(|t| vec![(t as f64 * 0.37).sin(), (t as f64 * 0.11).cos(), 0.25])
            .collect();
        let run = |seed| {
            let mut policy = ScaleFreeBandit::new(3, Exploration::Adaptive, seed).unwrap();
            losses
                .iter()
                .map(|l| policy.play_round(l).unwrap())
                .collect::<Vec<_>>()
        };
        let a = run(9);
        let b = run(9);
        let c = run(10);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.arm, y.arm);
            assert_eq!(x.incurred, y.incurred);
            assert_eq!(x.eta_after, y.eta_after);
        }
        assert!(a.iter().zip(c.iter()).any(|(x, y)| x.arm != y.arm));
    }

    #[test]
    fn adaptive_increment_stays_within_its_cap() {
        // The increment driving the adaptive schedule can be recovered from
        // successive rates: gamma_t = n/(2n + S_t), so S_t = n/gamma_t - 2n.
        let n = 4usize;
        let mut policy = ScaleFreeBandit::new(n, Exploration::Adaptive, 13).unwrap();
        let mut prev_sum = 0.0;
        for t in 0..200 {
            let scale = 10f64.powf((t % 7) as f64 - 3.0);
            let loss: Vec<f64> = (0..n)
                .map(|i| scale * (((t + i) as f64 * 0.711).sin()))
                .collect();
            let round = policy.play_round(&loss).unwrap();
            let sum = n as f64 / round.gamma_after - 2.0 * n as f64;
            let increment = sum - prev_sum;
            let cap = n as f64 * round.incurred.abs();
            assert!(
                increment >= -1e-9 && increment <= cap + 1e-9 * (1.0 + cap),
                "round {t}: increment {increment} outside [0, {cap}]"
            );
            prev_sum = sum;
        }
    }

    #[test]
    fn exp3_zero_losses_stay_uniform() {
        let mut policy = Exp3::new(3, 100, 1.0, 0).unwrap();
        for _ in 0..10 {
            policy.play_round(&[0.0; 3]).unwrap();
        }
        for &w in policy.weights().iter() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn exp3_raises_on_scale_violation() {
        let mut policy = Exp3::new(2, 100, 1.0, 0).unwrap();
        let err = policy.play_round(&[2.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::ScaleViolation { .. }));
    }

    #[test]
    fn exp3_matches_hand_rolled_exponential_weights() {
        let seed = 4;
        let n = 2;
        let horizon = 3;
        let g = 1.0;
        let mut policy = Exp3::new(n, horizon, g, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta = ((n as f64).ln() / (horizon as f64 * n as f64)).sqrt() / g;
        let mut weights = vec![1.0f64; n];
        for _ in 0..horizon {
            let total: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let dist = SimplexPoint::new(probs.clone()).unwrap();
            let arm = sample_index(&mut rng, &dist);
            let loss = [1.0, 0.0];
            weights[arm] *= (-eta * loss[arm] / probs[arm]).exp();

            let round = policy.play_round(&loss).unwrap();
            assert_eq!(round.arm, arm);
            let total: f64 = weights.iter().sum();
            for (expected, actual) in weights
                .iter()
                .map(|w| w / total)
                .zip(policy.weights().iter())
            {
                assert!((expected - actual).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trajectories_keep_schedules_monotone_and_floored(
            flat in proptest::collection::vec(-5.0f64..5.0, 60),
            seed in 0u64..1000,
            adaptive in proptest::bool::ANY,
        ) {
            let n = 3;
            let mode = if adaptive { Exploration::Adaptive } else { Exploration::NonAdaptive };
            let mut policy = ScaleFreeBandit::new(n, mode, seed).unwrap();
            let mut prev_gamma = 0.5;
            let mut prev_eta = n as f64;
            for chunk in flat.chunks(n) {
                let round = policy.play_round(chunk).unwrap();
                // sampling floor
                for &c in round.sampling.iter() {
                    prop_assert!(c >= round.gamma_before / n as f64 - 1e-15);
                }
                // one-hot estimate magnitude cap
                let est = round.estimate.scaled().abs();
                prop_assert!(
                    est <= n as f64 * round.incurred.abs() / round.gamma_before + 1e-9
                );
                // quadratic form cap given gamma <= 1/2
                let quad: f64 = round.iterate[round.arm] * round.estimate.scaled().powi(2);
                let cap = 2.0 * round.incurred.powi(2) / round.sampling[round.arm];
                prop_assert!(quad <= cap + 1e-9 * (1.0 + cap));
                // monotone schedules in (0, 1/2]
                prop_assert!(round.gamma_after > 0.0 && round.gamma_after <= 0.5);
                prop_assert!(round.gamma_after <= prev_gamma + 1e-15);
                prop_assert!(round.eta_after <= prev_eta + 1e-12);
                prev_gamma = round.gamma_after;
                prev_eta = round.eta_after;
            }
        }
    }
}
