//! Safeguarded scalar root-finding: Newton steps confined to a sign-change
//! bracket, with bisection whenever Newton would leave it.

use crate::error::{Error, Result};

/// Maximum iterations before the solver reports failure.
pub const MAX_ITERATIONS: usize = 200;

/// Find the root of a strictly increasing function inside `(lo, hi)`.
///
/// `eval` returns `(f(x), f'(x))`. The caller must supply a valid bracket
/// with `f(lo) < 0 < f(hi)`; the bracket doubles as the monotonicity
/// witness for uniqueness. Converges when `|f(x)| ≤ tol` or when the
/// bracket collapses to machine width with the best residual still within
/// `collapse_tol`.
pub(crate) fn solve_increasing(
    eval: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    collapse_tol: f64,
) -> Result<f64> {
    debug_assert!(lo < hi, "bracket must be ordered");
    let mut x = 0.5 * (lo + hi);
    let mut best_x = x;
    let mut best_res = f64::INFINITY;

    for iterations in 0..MAX_ITERATIONS {
        let (fx, dfx) = eval(x);
        let res = fx.abs();
        if res <= tol {
            return Ok(x);
        }
        if res < best_res {
            best_res = res;
            best_x = x;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }

        let newton = x - fx / dfx;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };

        // Bracket exhausted at machine precision: return the best point seen
        // if it meets the relaxed residual contract.
        let width_floor = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        if hi - lo <= width_floor {
            if best_res <= collapse_tol {
                return Ok(best_x);
            }
            return Err(Error::Convergence {
                iterations,
                residual: best_res,
            });
        }
    }

    Err(Error::Convergence {
        iterations: MAX_ITERATIONS,
        residual: best_res,
    })
}
