//! Points on the probability simplex and the two scalar normalization
//! problems behind every FTRL round.
//!
//! Normalizing a potential over the simplex means solving
//! `g(θ, λ) = Σᵢ ψ(θ(i) + λ) = 1` in `λ`. Because `g` is continuous and
//! strictly increasing in `λ` with limits `0` and `+∞`, the root is unique;
//! [`solve_lambda`] brackets it and refines with safeguarded Newton. The
//! FTRL iterate is then available in closed form,
//! `p = ψ(θ + λ(θ))` with `θ = -η · cumulative loss` ([`ftrl_iterate`]).
//!
//! The same machinery computes the mixability gap
//! `M(η) = sup_q [lᵀ(p - q) - Breg_F(q‖p)/η]` exactly: the supremum is
//! attained strictly inside the simplex (the regularizer is Legendre), and
//! the stationarity condition `ψ⁻¹(q(i)) = ψ⁻¹(p(i)) - η(l(i) + μ)` is one
//! more instance of the normalization problem ([`mixability_gap`]).

use crate::error::{Error, Result};
use crate::potential::{bregman, Potential};
use crate::solver::solve_increasing;

/// Absolute tolerance on `|Σ coords - 1|` accepted by [`SimplexPoint::new`].
pub const SIMPLEX_SUM_TOL: f64 = 1e-10;

/// Residual target for the normalization solves: `|Σ ψ(θ+λ) - 1|`.
pub const LAMBDA_RESIDUAL_TOL: f64 = 1e-13;

/// A strictly positive probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validates positivity of every coordinate and `Σ = 1` within
    /// [`SIMPLEX_SUM_TOL`].
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter(
                "simplex point needs at least one coordinate".into(),
            ));
        }
        for (i, &c) in coords.iter().enumerate() {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Domain(format!(
                    "coordinate {i} = {c} must be strictly positive and finite"
                )));
            }
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::Domain(format!(
                "coordinates sum to {sum}, expected 1 within {SIMPLEX_SUM_TOL:e}"
            )));
        }
        Ok(Self { coords })
    }

    /// The uniform distribution `(1/n, …, 1/n)`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one coordinate");
        Self {
            coords: vec![1.0 / n as f64; n],
        }
    }

    /// The shifted vertex `(1-ε)·eᵢ + ε/n`: the standard strictly positive
    /// comparator for arm `arm`.
    pub fn epsilon_shifted(n: usize, arm: usize, epsilon: f64) -> Result<Self> {
        if n == 0 || arm >= n {
            return Err(Error::InvalidParameter(format!(
                "arm {arm} out of range for {n} coordinates"
            )));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {epsilon} must lie in (0, 1]"
            )));
        }
        let base = epsilon / n as f64;
        let mut coords = vec![base; n];
        coords[arm] += 1.0 - epsilon;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.coords.iter()
    }

    /// Smallest coordinate.
    pub fn min_coord(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Running sum of loss vectors, accumulated with Kahan compensation so that
/// long runs of large importance-weighted estimates do not lose low-order
/// bits.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeLoss {
    sum: Vec<f64>,
    compensation: Vec<f64>,
    rounds: usize,
}

impl CumulativeLoss {
    pub fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            compensation: vec![0.0; n],
            rounds: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    pub fn add(&mut self, loss: &[f64]) -> Result<()> {
        if loss.len() != self.sum.len() {
            return Err(Error::InvalidParameter(format!(
                "loss has {} coordinates, accumulator has {}",
                loss.len(),
                self.sum.len()
            )));
        }
        if loss.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("loss vector must be finite".into()));
        }
        for ((sum, comp), &l) in self
            .sum
            .iter_mut()
            .zip(self.compensation.iter_mut())
            .zip(loss.iter())
        {
            let y = l - *comp;
            let t = *sum + y;
            *comp = (t - *sum) - y;
            *sum = t;
        }
        self.rounds += 1;
        Ok(())
    }
}

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidParameter("theta must be non-empty".into()));
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("theta must be finite".into()));
    }
    Ok(())
}

/// Shared core of the normalization solves.
///
/// The problem is shift-invariant (`θ + λ` is all that matters), so it is
/// solved with `θ` translated by its maximum. That keeps the argument of
/// `ψ` well-conditioned even when `θ` entries are enormous (adaptive rates
/// can push them past 1e9, where computing `θ(i) + λ` directly would lose
/// seven digits to cancellation). Returns the shifted coordinates, the
/// shift and the root in the shifted frame.
fn solve_shifted(pot: &impl Potential, theta: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    check_theta(theta)?;
    let shift = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = theta.iter().map(|&t| t - shift).collect();

    let g = |mu: f64| -> f64 { shifted.iter().map(|&t| pot.psi(t + mu)).sum::<f64>() - 1.0 };
    let dg = |mu: f64| -> f64 { shifted.iter().map(|&t| pot.psi_prime(t + mu)).sum() };

    // In the shifted frame max θ' = 0, so the domain boundary for mu is a.
    let a = pot.domain_end();

    // Upper bracket endpoint: walk toward the domain boundary (finite a) or
    // expand upward (a = +inf) until the sum exceeds 1.
    let hi = if a.is_finite() {
        let mut delta = 1.0;
        loop {
            let cand = a - delta;
            if g(cand) > 0.0 {
                break cand;
            }
            delta *= 0.5;
            if delta < f64::EPSILON * a.abs().max(1.0) {
                return Err(Error::Convergence {
                    iterations: 0,
                    residual: g(cand).abs(),
                });
            }
        }
    } else {
        let mut cand = 1.0;
        let mut tries = 0;
        while g(cand) <= 0.0 {
            cand *= 2.0;
            tries += 1;
            if tries > 2048 || !cand.is_finite() {
                return Err(Error::Convergence {
                    iterations: tries,
                    residual: g(cand).abs(),
                });
            }
        }
        cand
    };

    // Lower bracket endpoint: expand geometrically until the sum drops
    // below 1 (guaranteed since psi -> 0 at -inf).
    let mut step = hi.abs().max(1.0);
    let mut lo = hi - step;
    while g(lo) >= 0.0 {
        step *= 2.0;
        lo = hi - step;
        if !lo.is_finite() {
            return Err(Error::Convergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
    }

    let mu = solve_increasing(|x| (g(x), dg(x)), lo, hi, LAMBDA_RESIDUAL_TOL, 1e-12)?;
    Ok((shifted, shift, mu))
}

/// Solve and evaluate: the normalized point `ψ(θ + λ(θ))`, built in the
/// shifted frame where the solve is accurate.
fn normalized_point(pot: &impl Potential, theta: &[f64]) -> Result<SimplexPoint> {
    let (shifted, _, mu) = solve_shifted(pot, theta)?;
    SimplexPoint::new(shifted.iter().map(|&t| pot.psi(t + mu)).collect())
}

/// Solve `Σᵢ ψ(θ(i) + λ) = 1` for the unique `λ < a - maxᵢ θ(i)`.
///
/// The root is bracketed first — the sign change at the bracket endpoints
/// witnesses the strict monotonicity that makes it unique — then refined by
/// safeguarded Newton. Residual on exit is at most [`LAMBDA_RESIDUAL_TOL`]
/// (`1e-12` in degenerate machine-precision corners).
pub fn solve_lambda(pot: &impl Potential, theta: &[f64]) -> Result<f64> {
    let (_, shift, mu) = solve_shifted(pot, theta)?;
    Ok(mu - shift)
}

/// Closed-form FTRL iterate `ψ(θ + λ(θ))` with `θ = -η · cumloss`.
///
/// This is the minimizer of `F(q) + η Σ_s l_sᵀ q` over the simplex; the
/// Legendre property of `F` keeps it strictly interior. Adding a constant
/// to every cumulative-loss coordinate leaves the iterate unchanged (the
/// shift is absorbed by `λ`).
pub fn ftrl_iterate(
    pot: &impl Potential,
    eta: f64,
    cumloss: &CumulativeLoss,
) -> Result<SimplexPoint> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!(
            "learning rate eta = {eta} must be positive and finite"
        )));
    }
    let n = cumloss.dim();
    if n == 1 {
        return Ok(SimplexPoint::uniform(1));
    }
    let theta: Vec<f64> = cumloss.sum().iter().map(|&s| -eta * s).collect();
    normalized_point(pot, &theta)
}

/// Exact mixability gap together with its maximizer.
#[derive(Debug, Clone)]
pub struct GapSolution {
    /// `M(η) = sup_q [lᵀ(p - q) - Breg_F(q‖p)/η]`, clamped at 0 (the exact
    /// value is nonnegative since `q = p` is feasible).
    pub value: f64,
    /// The attaining point `q*`, strictly inside the simplex.
    pub maximizer: SimplexPoint,
}

/// Compute the mixability gap of a loss vector at iterate `p` and rate `η`.
///
/// The interior stationarity condition reduces the supremum to one more
/// normalization solve with `θ(i) = ψ⁻¹(p(i)) - η·l(i)`, which is exact for
/// every shipped potential. For the log-barrier this is the textbook
/// `q(i) = 1 / (1/p(i) + η(l(i) + μ))` system solved for the multiplier.
pub fn mixability_gap(
    pot: &impl Potential,
    p: &SimplexPoint,
    loss: &[f64],
    eta: f64,
) -> Result<GapSolution> {
    if loss.len() != p.dim() {
        return Err(Error::InvalidParameter(format!(
            "loss has {} coordinates, iterate has {}",
            loss.len(),
            p.dim()
        )));
    }
    if loss.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("loss vector must be finite".into()));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!(
            "learning rate eta = {eta} must be positive and finite"
        )));
    }
    // Single-point simplex: the only feasible q is p itself.
    if p.dim() == 1 {
        return Ok(GapSolution {
            value: 0.0,
            maximizer: p.clone(),
        });
    }

    let theta: Vec<f64> = p
        .iter()
        .zip(loss.iter())
        .map(|(&pi, &li)| pot.psi_inv(pi) - eta * li)
        .collect();
    let maximizer = normalized_point(pot, &theta)?;

    let mut gain = 0.0;
    for i in 0..p.dim() {
        gain += loss[i] * (p[i] - maximizer[i]);
    }
    let mut div = 0.0;
    for (&qi, &pi) in maximizer.iter().zip(p.iter()) {
        div += bregman(pot, qi, pi)?;
    }
    Ok(GapSolution {
        value: (gain - div / eta).max(0.0),
        maximizer,
    })
}

/// Closed-form upper bound `(η/2) Σᵢ p(i) l(i)²` on the log-barrier
/// mixability gap, valid for arbitrary real-valued losses.
///
/// Diagnostic only: the engines always use the exact gap.
pub fn log_barrier_gap_bound(p: &SimplexPoint, loss: &[f64], eta: f64) -> f64 {
    0.5 * eta
        * p.iter()
            .zip(loss.iter())
            .map(|(&pi, &li)| pi * li * li)
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Exponential, LogBarrier};
    use proptest::prelude::*;

    fn residual(pot: &impl Potential, theta: &[f64], lambda: f64) -> f64 {
        (theta.iter().map(|&t| pot.psi(t + lambda)).sum::<f64>() - 1.0).abs()
    }

    #[test]
    fn simplex_point_rejects_bad_inputs() {
        assert!(SimplexPoint::new(vec![]).is_err());
        assert!(SimplexPoint::new(vec![0.5, 0.5, 0.1]).is_err());
        assert!(SimplexPoint::new(vec![1.1, -0.1]).is_err());
        assert!(SimplexPoint::new(vec![0.4, 0.6]).is_ok());
    }

    #[test]
    fn epsilon_shifted_comparator_shape() {
        let c = SimplexPoint::epsilon_shifted(4, 2, 0.1).unwrap();
        assert!((c[2] - 0.925).abs() < 1e-15);
        assert!((c[0] - 0.025).abs() < 1e-15);
        assert!(SimplexPoint::epsilon_shifted(4, 4, 0.1).is_err());
        assert!(SimplexPoint::epsilon_shifted(4, 0, 0.0).is_err());
    }

    #[test]
    fn lambda_symmetric_theta_gives_minus_n() {
        for n in [2usize, 3, 7] {
            let theta = vec![0.0; n];
            let lambda = solve_lambda(&LogBarrier, &theta).unwrap();
            assert!((lambda + n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn lambda_golden_ratio_instance() {
        // theta = (0, -1) reduces to lambda^2 + lambda - 1 = 0; the root on
        // the admissible side is (-1 - sqrt 5)/2.
        let lambda = solve_lambda(&LogBarrier, &[0.0, -1.0]).unwrap();
        let expected = (-1.0 - 5.0f64.sqrt()) / 2.0;
        assert!((lambda - expected).abs() < 1e-10);
        assert!(residual(&LogBarrier, &[0.0, -1.0], lambda) <= 1e-12);
    }

    #[test]
    fn lambda_zero_for_already_normalized_exponential() {
        let theta = [0.2f64.ln(), 0.8f64.ln()];
        let lambda = solve_lambda(&Exponential, &theta).unwrap();
        assert!(lambda.abs() < 1e-12);
    }

    #[test]
    fn lambda_rejects_non_finite_theta() {
        assert!(solve_lambda(&LogBarrier, &[]).is_err());
        assert!(solve_lambda(&LogBarrier, &[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn ftrl_iterate_zero_losses_is_uniform() {
        let cum = CumulativeLoss::new(5);
        let p = ftrl_iterate(&LogBarrier, 1.0, &cum).unwrap();
        for &c in p.iter() {
            assert!((c - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn ftrl_iterate_golden_instance() {
        let mut cum = CumulativeLoss::new(2);
        cum.add(&[0.0, 1.0]).unwrap();
        let p = ftrl_iterate(&LogBarrier, 1.0, &cum).unwrap();
        assert!((p[0] - 0.618_033_988_749_894_9).abs() < 1e-10);
        assert!((p[1] - 0.381_966_011_250_105_15).abs() < 1e-10);
        // Lower cumulative loss gets the larger mass.
        assert!(p[0] > p[1]);
    }

    #[test]
    fn ftrl_iterate_constant_losses_stay_uniform() {
        // A constant cumulative-loss vector is absorbed by the multiplier.
        for c in [-7.0, 0.3, 120.0] {
            let mut cum = CumulativeLoss::new(4);
            cum.add(&[c; 4]).unwrap();
            for eta in [0.1, 1.0, 10.0] {
                let p = ftrl_iterate(&LogBarrier, eta, &cum).unwrap();
                for &coord in p.iter() {
                    assert!((coord - 0.25).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn ftrl_iterate_single_arm() {
        let cum = CumulativeLoss::new(1);
        let p = ftrl_iterate(&LogBarrier, 2.0, &cum).unwrap();
        assert_eq!(p.as_slice(), &[1.0]);
    }

    #[test]
    fn gap_is_zero_for_zero_loss() {
        let p = SimplexPoint::new(vec![0.3, 0.7]).unwrap();
        let sol = mixability_gap(&LogBarrier, &p, &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(sol.value, 0.0);
        for (a, b) in sol.maximizer.iter().zip(p.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn gap_vanishes_for_constant_loss_vectors() {
        let p = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        for c in [-3.0, 0.7, 42.0] {
            let sol = mixability_gap(&LogBarrier, &p, &[c, c, c], 0.8).unwrap();
            assert!(sol.value <= 1e-10, "gap {} for constant {c}", sol.value);
        }
    }

    #[test]
    fn gap_respects_log_barrier_stability_bound() {
        let p = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        let loss = [1.0, 0.0];
        for eta in [0.05, 0.1, 1.0, 5.0] {
            let sol = mixability_gap(&LogBarrier, &p, &loss, eta).unwrap();
            let linf = 1.0;
            assert!(sol.value >= 0.0);
            assert!(sol.value <= 2.0 * linf + 1e-10);
            assert!(sol.value <= log_barrier_gap_bound(&p, &loss, eta) + 1e-10);
        }
    }

    #[test]
    fn exponential_gap_matches_log_partition_closed_form() {
        // For the exponential potential the gap has the closed form
        // l.p + ln(sum_i p_i exp(-eta l_i)) / eta.
        let p = SimplexPoint::new(vec![0.2, 0.5, 0.3]).unwrap();
        let loss = [1.0, -0.5, 0.25];
        let eta = 0.7;
        let sol = mixability_gap(&Exponential, &p, &loss, eta).unwrap();
        let dot: f64 = p.iter().zip(loss.iter()).map(|(&a, &b)| a * b).sum();
        let z: f64 = p
            .iter()
            .zip(loss.iter())
            .map(|(&pi, &li)| pi * (-eta * li).exp())
            .sum();
        let expected = dot + z.ln() / eta;
        assert!((sol.value - expected).abs() < 1e-12);
    }

    #[test]
    fn gap_single_arm_degenerates_to_zero() {
        let p = SimplexPoint::uniform(1);
        let sol = mixability_gap(&LogBarrier, &p, &[123.0], 0.1).unwrap();
        assert_eq!(sol.value, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn lambda_residual_within_tolerance(
            theta in proptest::collection::vec(-50.0f64..50.0, 1..9)
        ) {
            let lambda = solve_lambda(&LogBarrier, &theta).unwrap();
            prop_assert!(residual(&LogBarrier, &theta, lambda) <= 1e-12);
            let lambda_exp = solve_lambda(&Exponential, &theta).unwrap();
            prop_assert!(residual(&Exponential, &theta, lambda_exp) <= 1e-12);
        }

        #[test]
        fn iterate_is_invariant_under_loss_translation(
            sums in proptest::collection::vec(-20.0f64..20.0, 2..7),
            shift in -100.0f64..100.0,
            eta in 0.01f64..5.0,
        ) {
            let mut base = CumulativeLoss::new(sums.len());
            base.add(&sums).unwrap();
            let mut shifted = CumulativeLoss::new(sums.len());
            let moved: Vec<f64> = sums.iter().map(|s| s + shift).collect();
            shifted.add(&moved).unwrap();
            let p = ftrl_iterate(&LogBarrier, eta, &base).unwrap();
            let q = ftrl_iterate(&LogBarrier, eta, &shifted).unwrap();
            for (a, b) in p.iter().zip(q.iter()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn gap_nonnegative_and_below_sup_norm_bound(
            raw_p in proptest::collection::vec(0.05f64..1.0, 2..5),
            loss in proptest::collection::vec(-10.0f64..10.0, 4),
            eta in 0.01f64..10.0,
        ) {
            let total: f64 = raw_p.iter().sum();
            let p = SimplexPoint::new(raw_p.iter().map(|v| v / total).collect()).unwrap();
            let loss = &loss[..p.dim()];
            let sol = mixability_gap(&LogBarrier, &p, loss, eta).unwrap();
            let linf = loss.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            prop_assert!(sol.value >= 0.0);
            prop_assert!(sol.value <= 2.0 * linf + 1e-10);
            prop_assert!(sol.value <= log_barrier_gap_bound(&p, loss, eta) + 1e-10);
        }
    }
}
