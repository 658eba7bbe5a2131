//! Runnable verification battery.
//!
//! Each check re-derives a contract of the library with independent means —
//! closed forms, finite differences, exhaustive grids — and reports a
//! pass/fail outcome with a diagnostic detail string. The battery backs the
//! CLI `verify` subcommand and the acceptance test suite; everything is
//! deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::{iw_estimate, Exploration, ScaleFreeBandit};
use crate::ftrl::{
    verify_adaftrl_bound, verify_regret_equality, verify_summation_lemma, ComparatorTerm, FtrlState,
};
use crate::potential::{
    bregman, dual_bregman, exponential_unit_certificate, log_barrier_unit_certificate, Exponential,
    LogBarrier, Potential, Regularizer,
};
use crate::simplex::{
    ftrl_iterate, log_barrier_gap_bound, mixability_gap, CumulativeLoss, SimplexPoint,
};

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Brute-force optimization over the simplex, independent of the
/// root-finding path used by the library.
pub mod oracle {
    /// Golden-section maximization of a unimodal scalar function on `(lo, hi)`.
    fn golden_max(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        const INVPHI: f64 = 0.618_033_988_749_894_9;
        let mut c = hi - INVPHI * (hi - lo);
        let mut d = lo + INVPHI * (hi - lo);
        let mut fc = g(c);
        let mut fd = g(d);
        for _ in 0..200 {
            if hi - lo < 1e-13 {
                break;
            }
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - INVPHI * (hi - lo);
                fc = g(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + INVPHI * (hi - lo);
                fd = g(d);
            }
        }
        0.5 * (lo + hi)
    }

    /// Maximize `f` over the interior of the probability simplex by grid
    /// search followed by local refinement. Supports `n ∈ {2, 3}`.
    ///
    /// For `n = 2` the refinement is a golden-section pass around the best
    /// grid point; for `n = 3` it is cyclic coordinate ascent with
    /// golden-section line searches. Both only ever evaluate `f`.
    pub fn maximize_on_simplex(
        n: usize,
        step: f64,
        refine: bool,
        f: &dyn Fn(&[f64]) -> f64,
    ) -> (Vec<f64>, f64) {
        const EDGE: f64 = 1e-9;
        match n {
            2 => {
                let mut best = (vec![0.5, 0.5], f(&[0.5, 0.5]));
                let cells = (1.0 / step) as usize;
                for i in 1..cells {
                    let q1 = i as f64 * step;
                    let v = f(&[q1, 1.0 - q1]);
                    if v > best.1 {
                        best = (vec![q1, 1.0 - q1], v);
                    }
                }
                if refine {
                    let lo = (best.0[0] - step).max(EDGE);
                    let hi = (best.0[0] + step).min(1.0 - EDGE);
                    let g = |q1: f64| f(&[q1, 1.0 - q1]);
                    let q1 = golden_max(&g, lo, hi);
                    let v = g(q1);
                    if v > best.1 {
                        best = (vec![q1, 1.0 - q1], v);
                    }
                }
                best
            }
            3 => {
                let third = 1.0 / 3.0;
                let mut best = (vec![third; 3], f(&[third, third, third]));
                let cells = (1.0 / step) as usize;
                for i in 1..cells {
                    for j in 1..cells - i {
                        let q1 = i as f64 * step;
                        let q2 = j as f64 * step;
                        let q3 = 1.0 - q1 - q2;
                        if q3 <= EDGE {
                            continue;
                        }
                        let v = f(&[q1, q2, q3]);
                        if v > best.1 {
                            best = (vec![q1, q2, q3], v);
                        }
                    }
                }
                if refine {
                    let mut q = best.0.clone();
                    for _ in 0..60 {
                        let q2 = q[1];
                        let g1 = |q1: f64| f(&[q1, q2, 1.0 - q1 - q2]);
                        q[0] = golden_max(&g1, EDGE, 1.0 - q2 - EDGE);
                        let q1 = q[0];
                        let g2 = |q2: f64| f(&[q1, q2, 1.0 - q1 - q2]);
                        q[1] = golden_max(&g2, EDGE, 1.0 - q1 - EDGE);
                        q[2] = 1.0 - q[0] - q[1];
                    }
                    let v = f(&q);
                    if v > best.1 {
                        best = (q, v);
                    }
                }
                best
            }
            _ => panic!("oracle supports n in {{2, 3}}, got {n}"),
        }
    }

    /// Direct log-barrier mixability-gap objective (closed form, no library
    /// Bregman code involved).
    pub fn gap_objective<'a>(
        p: &'a [f64],
        loss: &'a [f64],
        eta: f64,
    ) -> impl Fn(&[f64]) -> f64 + 'a {
        move |q: &[f64]| {
            let mut gain = 0.0;
            let mut div = 0.0;
            for i in 0..p.len() {
                gain += loss[i] * (p[i] - q[i]);
                let r = q[i] / p[i];
                div += r - 1.0 - r.ln();
            }
            gain - div / eta
        }
    }

    /// Negated log-barrier FTRL objective, so maximizing it minimizes
    /// `F(q) + η·Σ_s l_sᵀ q` (constant terms dropped).
    pub fn ftrl_objective<'a>(cum: &'a [f64], eta: f64) -> impl Fn(&[f64]) -> f64 + 'a {
        move |q: &[f64]| {
            let mut v = 0.0;
            for i in 0..cum.len() {
                v += q[i].ln() - eta * cum[i] * q[i];
            }
            v
        }
    }
}

fn rel_ok(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn random_interior(rng: &mut ChaCha8Rng, n: usize) -> SimplexPoint {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.15..1.0)).collect();
    let total: f64 = raw.iter().sum();
    SimplexPoint::new(raw.iter().map(|v| v / total).collect()).expect("interior point")
}

/// Bregman change of variables: `Breg_f(ψ(v)‖ψ(u)) = Breg_f*(u‖v)` over
/// 10³ random pairs per potential, relative tolerance `1e-10`.
pub fn check_bregman_dual_identity(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut pass = true;

    let mut run = |pot: &dyn Fn(&mut ChaCha8Rng) -> (f64, f64, f64, f64)| {
        for _ in 0..1000 {
            let (primal, dual, mag_a, mag_b) = pot(&mut rng);
            let err = (primal - dual).abs() / (1.0 + mag_a.abs().max(mag_b.abs()));
            worst = worst.max(err);
            if err > 1e-10 {
                pass = false;
            }
        }
    };

    run(&|rng| {
        let u = -rng.random_range(0.05..30.0);
        let v = -rng.random_range(0.05..30.0);
        let lb = LogBarrier;
        let primal = bregman(&lb, lb.psi(v), lb.psi(u)).expect("domain");
        let dual = dual_bregman(&lb, u, v).expect("domain");
        (primal, dual, primal, dual)
    });
    run(&|rng| {
        let u = rng.random_range(-8.0..8.0);
        let v = rng.random_range(-8.0..8.0);
        let e = Exponential;
        let primal = bregman(&e, e.psi(v), e.psi(u)).expect("domain");
        let dual = dual_bregman(&e, u, v).expect("domain");
        (primal, dual, primal, dual)
    });

    CheckOutcome::new(
        "bregman-dual-identity",
        pass,
        format!("worst relative deviation {worst:.3e} over 2x1000 pairs (tol 1e-10)"),
    )
}

/// Unit-square instance of the secant lower bound:
/// `y/x - 1 - ln(y/x) ≥ (x-y)²/(2x)` on a 100×100 grid of `(0, 1]²`.
pub fn check_unit_square_region() -> CheckOutcome {
    let mut worst = f64::INFINITY;
    let mut pass = true;
    for i in 1..=100 {
        for j in 1..=100 {
            let x = i as f64 / 100.0;
            let y = j as f64 / 100.0;
            let lhs = y / x - 1.0 - (y / x).ln();
            let rhs = (x - y) * (x - y) / (2.0 * x);
            let margin = lhs - rhs;
            worst = worst.min(margin);
            if margin < -1e-12 {
                pass = false;
            }
        }
    }
    CheckOutcome::new(
        "unit-square-lower-bound",
        pass,
        format!("smallest margin {worst:.3e} on the 100x100 grid (floor -1e-12)"),
    )
}

/// Generic certificates dominate nothing they shouldn't: lower bound ≤
/// divergence on 10³ random valid pairs per shipped certificate.
pub fn check_certificate_lower_bounds(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = f64::INFINITY;

    let log_cert = log_barrier_unit_certificate();
    for _ in 0..1000 {
        let x = rng.random_range(0.001..=1.0);
        let y = rng.random_range(0.001..=1.0);
        let lb = log_cert.lower_bound(y, x).expect("valid pair");
        let div = bregman(&LogBarrier, y, x).expect("domain");
        worst = worst.min(div - lb);
        if lb > div + 1e-12 {
            pass = false;
        }
    }

    let exp_cert = exponential_unit_certificate();
    for _ in 0..1000 {
        let x = rng.random_range(0.05..5.0);
        let max_y = std::f64::consts::E * x;
        let y = rng.random_range(1e-6..max_y);
        let lb = exp_cert.lower_bound(y, x).expect("valid pair");
        let div = bregman(&Exponential, y, x).expect("domain");
        worst = worst.min(div - lb);
        if lb > div + 1e-12 {
            pass = false;
        }
    }

    CheckOutcome::new(
        "certificate-lower-bounds",
        pass,
        format!("smallest divergence-minus-bound gap {worst:.3e} over 2x1000 pairs"),
    )
}

/// Basic calculus contracts of both shipped potentials: inverse round-trip,
/// strict monotonicity, positive derivative, and convexity of the
/// associated function via finite differences of its derivative.
pub fn check_potential_calculus(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut notes = Vec::new();

    fn probe(
        pot: &impl Potential,
        xs: &[f64],
        us: &[f64],
        rng: &mut ChaCha8Rng,
        pass: &mut bool,
        notes: &mut Vec<String>,
    ) {
        let mut worst_roundtrip = 0.0f64;
        for &x in xs {
            let back = pot.psi(pot.psi_inv(x));
            let err = (back - x).abs() / x.max(1.0);
            worst_roundtrip = worst_roundtrip.max(err);
            if err > 1e-12 {
                *pass = false;
            }
        }
        for _ in 0..200 {
            let i = rng.random_range(0..us.len());
            let j = rng.random_range(0..us.len());
            let (u1, u2) = (us[i].min(us[j]), us[i].max(us[j]));
            if u1 < u2 && pot.psi(u1) >= pot.psi(u2) {
                *pass = false;
            }
        }
        for &u in us {
            let slope = pot.psi_prime(u);
            if !slope.is_finite() || slope <= 0.0 {
                *pass = false;
            }
        }
        // f'' > 0 via central differences of f' = psi_inv, compared against
        // the closed form 1/psi'(psi_inv(x)).
        let mut worst_fd = 0.0f64;
        for &x in xs {
            let h = 1e-6 * x.max(1e-3);
            let slope = (pot.legendre_prime(x + h) - pot.legendre_prime(x - h)) / (2.0 * h);
            if slope < -1e-10 {
                *pass = false;
            }
            let exact = 1.0 / pot.psi_prime(pot.psi_inv(x));
            let err = (slope - exact).abs() / exact.max(1e-12);
            worst_fd = worst_fd.max(err);
            if err > 1e-4 {
                *pass = false;
            }
        }
        notes.push(format!(
            "{}: roundtrip {worst_roundtrip:.2e}, f'' fd-vs-closed-form {worst_fd:.2e}",
            pot.name()
        ));
    }

    let xs: Vec<f64> = (0..60)
        .map(|k| 10f64.powf(-4.0 + 7.0 * k as f64 / 59.0))
        .collect();
    let us_log: Vec<f64> = (0..60)
        .map(|k| -10f64.powf(-3.0 + 6.0 * k as f64 / 59.0))
        .collect();
    probe(&LogBarrier, &xs, &us_log, &mut rng, &mut pass, &mut notes);
    let us_exp: Vec<f64> = (0..60).map(|k| -9.0 + 18.0 * k as f64 / 59.0).collect();
    probe(&Exponential, &xs, &us_exp, &mut rng, &mut pass, &mut notes);

    CheckOutcome::new("potential-calculus", pass, notes.join("; "))
}

/// Normalization solves on 10³ random inputs (entries in `[-50, 50]`,
/// 1 ≤ n ≤ 8, both potentials): residual at most 1e-12, plus the
/// closed-form golden-ratio instance to 1e-10.
pub fn check_lambda_solver(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = 0.0f64;

    for trial in 0..1000 {
        let n = rng.random_range(1..=8);
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-50.0..50.0)).collect();
        if trial % 2 == 0 {
            match crate::simplex::solve_lambda(&LogBarrier, &theta) {
                Ok(lambda) => {
                    let res = (theta
                        .iter()
                        .map(|&t| LogBarrier.psi(t + lambda))
                        .sum::<f64>()
                        - 1.0)
                        .abs();
                    worst = worst.max(res);
                    if res > 1e-12 {
                        pass = false;
                    }
                }
                Err(_) => pass = false,
            }
        } else {
            match crate::simplex::solve_lambda(&Exponential, &theta) {
                Ok(lambda) => {
                    let res = (theta
                        .iter()
                        .map(|&t| Exponential.psi(t + lambda))
                        .sum::<f64>()
                        - 1.0)
                        .abs();
                    worst = worst.max(res);
                    if res > 1e-12 {
                        pass = false;
                    }
                }
                Err(_) => pass = false,
            }
        }
    }

    let golden = crate::simplex::solve_lambda(&LogBarrier, &[0.0, -1.0]).expect("solvable");
    let expected = (-1.0 - 5.0f64.sqrt()) / 2.0;
    let golden_err = (golden - expected).abs();
    if golden_err > 1e-10 {
        pass = false;
    }

    CheckOutcome::new(
        "lambda-solver",
        pass,
        format!(
            "worst residual {worst:.3e} over 1000 solves; golden-ratio instance off by {golden_err:.3e}"
        ),
    )
}

/// Exact mixability gap versus the brute-force simplex oracle on 100
/// random instances over n ∈ {2, 3}, plus the stability envelope
/// `0 ≤ M ≤ min(2‖l‖∞, (η/2) pᵀl²)`.
pub fn check_gap_oracle(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = 0.0f64;

    // Frozen coarse-grid instance: p uniform over two arms, loss (1, 0),
    // eta = 0.1, oracle stepped at 1e-3 with no refinement.
    {
        let p = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        let loss = [1.0, 0.0];
        let (_, grid_value) = oracle::maximize_on_simplex(
            2,
            1e-3,
            false,
            &oracle::gap_objective(p.as_slice(), &loss, 0.1),
        );
        let solved = mixability_gap(&LogBarrier, &p, &loss, 0.1).expect("solvable");
        if (solved.value - grid_value).abs() > 1e-4 {
            pass = false;
        }
        worst = worst.max((solved.value - grid_value).abs());
    }

    for trial in 0..100 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let p = random_interior(&mut rng, n);
        let loss: Vec<f64> = if trial % 5 == 4 {
            // One-hot negative spikes, the importance-weighted shape.
            let mut l = vec![0.0; n];
            l[rng.random_range(0..n)] = -rng.random_range(1.0..8.0);
            l
        } else {
            (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
        };
        let eta = (rng.random_range(0.05f64.ln()..3.0f64.ln())).exp();

        let solved = mixability_gap(&LogBarrier, &p, &loss, eta).expect("solvable");
        let step = if n == 2 { 1e-3 } else { 0.01 };
        let (_, oracle_value) = oracle::maximize_on_simplex(
            n,
            step,
            true,
            &oracle::gap_objective(p.as_slice(), &loss, eta),
        );
        let diff = (solved.value - oracle_value).abs();
        worst = worst.max(diff);
        if diff > 1e-4 {
            pass = false;
        }

        let linf = loss.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let envelope = (2.0 * linf).min(log_barrier_gap_bound(&p, &loss, eta));
        if !(solved.value >= 0.0 && solved.value <= envelope + 1e-10) {
            pass = false;
        }
    }

    CheckOutcome::new(
        "mixability-gap-oracle",
        pass,
        format!("worst |solver - oracle| {worst:.3e} over 100 instances (tol 1e-4)"),
    )
}

/// FTRL iterate versus direct constrained minimization on small n.
pub fn check_ftrl_argmin_oracle(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = 0.0f64;

    for trial in 0..40 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let sums: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let eta = rng.random_range(0.05..2.0);
        let mut cum = CumulativeLoss::new(n);
        cum.add(&sums).expect("finite");
        let iterate = ftrl_iterate(&LogBarrier, eta, &cum).expect("solvable");

        let step = if n == 2 { 1e-3 } else { 0.01 };
        let (q, _) =
            oracle::maximize_on_simplex(n, step, true, &oracle::ftrl_objective(&sums, eta));
        for i in 0..n {
            let diff = (iterate[i] - q[i]).abs();
            worst = worst.max(diff);
            if diff > 1e-4 {
                pass = false;
            }
        }
    }

    CheckOutcome::new(
        "ftrl-argmin-oracle",
        pass,
        format!("worst per-coordinate |iterate - oracle| {worst:.3e} over 40 instances"),
    )
}

/// Adding a constant to every cumulative-loss coordinate leaves the FTRL
/// iterate unchanged to 1e-10 per coordinate.
pub fn check_translation_invariance(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let sums: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let shift = rng.random_range(-100.0..100.0);
        let eta = rng.random_range(0.01..5.0);
        let mut a = CumulativeLoss::new(n);
        a.add(&sums).expect("finite");
        let mut b = CumulativeLoss::new(n);
        b.add(&sums.iter().map(|s| s + shift).collect::<Vec<_>>())
            .expect("finite");
        let pa = ftrl_iterate(&LogBarrier, eta, &a).expect("solvable");
        let pb = ftrl_iterate(&LogBarrier, eta, &b).expect("solvable");
        for (x, y) in pa.iter().zip(pb.iter()) {
            worst = worst.max((x - y).abs());
            if (x - y).abs() > 1e-10 {
                pass = false;
            }
        }
    }
    CheckOutcome::new(
        "ftrl-translation-invariance",
        pass,
        format!("worst per-coordinate drift {worst:.3e} over 200 shifted pairs"),
    )
}

/// The exact regret decomposition on 50 random adaptive traces
/// (T = 50, n = 5, standard-normal losses, ε-shifted comparators):
/// residual within `1e-8 · (1 + |LHS|)`.
pub fn check_regret_identity(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reg = Regularizer::new(LogBarrier);
    let mut pass = true;
    let mut worst = 0.0f64;

    for _ in 0..50 {
        let n = 5;
        let losses: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                (0..n)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            })
            .collect();
        let (_, trace) =
            FtrlState::run(LogBarrier, n, n as f64, 1.0, &losses).expect("run succeeds");
        let comparator =
            SimplexPoint::epsilon_shifted(n, rng.random_range(0..n), 0.1).expect("valid");
        let residual =
            verify_regret_equality(&reg, &trace, &comparator).expect("well-formed trace");
        let lhs: f64 = trace
            .rounds
            .iter()
            .map(|r| {
                r.loss
                    .iter()
                    .zip(r.iterate.iter())
                    .map(|(&l, &p)| l * p)
                    .sum::<f64>()
                    - r.loss
                        .iter()
                        .zip(comparator.iter())
                        .map(|(&l, &c)| l * c)
                        .sum::<f64>()
            })
            .sum();
        let scaled = residual / (1.0 + lhs.abs());
        worst = worst.max(scaled);
        if scaled > 1e-8 {
            pass = false;
        }
    }

    CheckOutcome::new(
        "regret-identity",
        pass,
        format!("worst scaled residual {worst:.3e} over 50 traces (tol 1e-8)"),
    )
}

/// The closed-form log-barrier regret inequality on 100 random traces,
/// including heavy one-hot (importance-weighted-shaped) losses: slack
/// never below `-1e-8`.
pub fn check_adaftrl_inequality(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = f64::INFINITY;

    for trial in 0..100 {
        let n = 5;
        let t = 200;
        let losses: Vec<Vec<f64>> = if trial % 5 == 4 {
            (0..t)
                .map(|_| {
                    let mut l = vec![0.0; n];
                    let mag = 10f64.powf(rng.random_range(0.0..3.0));
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    l[rng.random_range(0..n)] = sign * mag;
                    l
                })
                .collect()
        } else {
            (0..t)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect()
        };
        let (_, trace) =
            FtrlState::run(LogBarrier, n, n as f64, 1.0, &losses).expect("run succeeds");
        let comparator =
            SimplexPoint::epsilon_shifted(n, rng.random_range(0..n), 0.01).expect("valid");
        for term in [
            ComparatorTerm::Exact,
            ComparatorTerm::Envelope { epsilon: 0.01 },
        ] {
            let slack = verify_adaftrl_bound(&trace, &comparator, term).expect("well-formed");
            worst = worst.min(slack);
            if slack < -1e-8 {
                pass = false;
            }
        }
    }

    CheckOutcome::new(
        "adaftrl-inequality",
        pass,
        format!("smallest slack {worst:.3e} over 100 traces x 2 modes (floor -1e-8)"),
    )
}

/// The scalar summation bound on 10³ random admissible sequences.
pub fn check_summation_bound(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = f64::INFINITY;

    for _ in 0..1000 {
        let t = rng.random_range(1..200);
        let cap = rng.random_range(0.5..5.0);
        let alpha = rng.random_range(0.2..8.0);
        let beta = rng.random_range(0.2..4.0);
        let weight = rng.random_range(0.1..10.0);
        let ms: Vec<f64> = (0..t).map(|_| rng.random_range(0.0..cap)).collect();
        let mut rate = alpha / beta;
        let mut running = 0.0;
        let mut gs = Vec::with_capacity(t);
        for &m in &ms {
            gs.push(m / rate);
            running += m;
            rate = alpha / (beta + running);
        }
        let slack = verify_summation_lemma(weight, cap, alpha, beta, &ms, &gs)
            .expect("admissible sequence");
        worst = worst.min(slack);
        if slack < 0.0 {
            pass = false;
        }
    }

    CheckOutcome::new(
        "summation-bound",
        pass,
        format!("smallest slack {worst:.3e} over 1000 sequences (floor 0)"),
    )
}

/// Stability-term bookkeeping: `η·M(η) = Ψ_p(η·l)` and `Ψ_p(l) ≤ pᵀl²` on
/// random log-barrier instances.
pub fn check_stability_identity(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let p = random_interior(&mut rng, n);
        let loss: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let eta = rng.random_range(0.05..3.0);
        let gap = mixability_gap(&LogBarrier, &p, &loss, eta)
            .expect("solvable")
            .value;
        let scaled: Vec<f64> = loss.iter().map(|&l| eta * l).collect();
        let stability = mixability_gap(&LogBarrier, &p, &scaled, 1.0)
            .expect("solvable")
            .value;
        if !rel_ok(eta * gap, stability, 1e-9) {
            pass = false;
        }
        worst = worst.max((eta * gap - stability).abs());
        let quad: f64 = p
            .iter()
            .zip(scaled.iter())
            .map(|(&pi, &li)| pi * li * li)
            .sum();
        if stability > quad + 1e-10 {
            pass = false;
        }
    }
    CheckOutcome::new(
        "stability-identity",
        pass,
        format!("worst identity drift {worst:.3e} over 200 instances"),
    )
}

/// Exhaustive importance-weighting unbiasedness for n ≤ 8:
/// `Σᵢ p'(i) · estimate(arm = i) = l` coordinatewise to 1e-12.
pub fn check_iw_unbiasedness(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let pprime = random_interior(&mut rng, n);
        let loss: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let mut expectation = vec![0.0; n];
        for arm in 0..n {
            let est = iw_estimate(arm, loss[arm], &pprime).expect("positive prob");
            expectation[arm] += pprime[arm] * est.scaled();
        }
        for (e, l) in expectation.iter().zip(loss.iter()) {
            worst = worst.max((e - l).abs());
            if (e - l).abs() > 1e-12 {
                pass = false;
            }
        }
    }
    CheckOutcome::new(
        "iw-unbiasedness",
        pass,
        format!("worst coordinate deviation {worst:.3e} over 200 instances (tol 1e-12)"),
    )
}

/// Both exploration schedules stay in `(0, 1/2]` and are non-increasing,
/// and the learning rate is non-increasing, along simulated trajectories.
pub fn check_schedule_monotonicity(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pass = true;
    let mut trajectories = 0;
    for mode in [Exploration::NonAdaptive, Exploration::Adaptive] {
        for _ in 0..5 {
            let n = 5;
            let mut policy = ScaleFreeBandit::new(n, mode, rng.random()).expect("valid policy");
            let mut prev_gamma = 0.5;
            let mut prev_eta = n as f64;
            for _ in 0..500 {
                let loss: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
                let round = policy.play_round(&loss).expect("round succeeds");
                if !(round.gamma_after > 0.0 && round.gamma_after <= 0.5) {
                    pass = false;
                }
                if round.gamma_after > prev_gamma + 1e-15 || round.eta_after > prev_eta + 1e-12 {
                    pass = false;
                }
                prev_gamma = round.gamma_after;
                prev_eta = round.eta_after;
            }
            trajectories += 1;
        }
    }
    CheckOutcome::new(
        "schedule-monotonicity",
        pass,
        format!("{trajectories} trajectories of 500 rounds, both schedules"),
    )
}

pub fn potential_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_bregman_dual_identity(seed),
        check_unit_square_region(),
        check_certificate_lower_bounds(seed.wrapping_add(1)),
        check_potential_calculus(seed.wrapping_add(2)),
    ]
}

pub fn simplex_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_lambda_solver(seed.wrapping_add(3)),
        check_gap_oracle(seed.wrapping_add(4)),
        check_ftrl_argmin_oracle(seed.wrapping_add(5)),
        check_translation_invariance(seed.wrapping_add(6)),
    ]
}

pub fn ftrl_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_regret_identity(seed.wrapping_add(7)),
        check_adaftrl_inequality(seed.wrapping_add(8)),
        check_summation_bound(seed.wrapping_add(9)),
        check_stability_identity(seed.wrapping_add(10)),
    ]
}

pub fn bandit_suite(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_iw_unbiasedness(seed.wrapping_add(11)),
        check_schedule_monotonicity(seed.wrapping_add(12)),
    ]
}

/// The full battery, deterministic in `seed`.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let mut all = potential_suite(seed);
    all.extend(simplex_suite(seed));
    all.extend(ftrl_suite(seed));
    all.extend(bandit_suite(seed));
    all
}
