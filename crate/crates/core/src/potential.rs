//! Potential functions and the Bregman machinery they generate.
//!
//! A *potential* is a convex, strictly increasing, continuously
//! differentiable map `ψ: (-∞, a) → (0, ∞)` with `ψ → 0` at `-∞` and
//! `ψ → ∞` at `a`. Every potential induces
//!
//! - an associated Legendre function `f(x) = ∫ ψ⁻¹(x) dx + C` on `(0, ∞)`,
//!   whose gradient blows up at `0` (this is what keeps normalized iterates
//!   strictly interior), and
//! - its convex conjugate `f*(u) = ∫ ψ(u) du - C` on `(-∞, a)`, with
//!   `f*' = ψ` and `f*'' = ψ'`.
//!
//! Two potentials are shipped: the log-barrier `ψ(u) = -1/u` on `(-∞, 0)`
//! (the regularizer the bandit algorithm runs on, `f(x) = -ln x`) and the
//! exponential `ψ(u) = eᵘ` on `(-∞, ∞)` (negative entropy, `f(x) = x ln x - x`),
//! which exercises the generality of the constructions in tests.
//!
//! On top of the calculus this module provides Bregman divergences of `f`
//! and `f*` (the two agree after the change of variables `x = ψ(u)`,
//! `y = ψ(v)` — see [`dual_bregman`]), secant-slope lower-bound certificates
//! of the form `Breg_f(y‖x) ≥ (x-y)²/(2 m(ψ⁻¹(x)))`, and the sum-form
//! simplex regularizer `F(x) = Σᵢ [f(x(i)) - f(1/n)]` together with its
//! weighted "mixed" Bregman variant used by the FTRL regret identity.

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// A convex, strictly increasing bijection `ψ: (-∞, a) → (0, ∞)` with the
/// calculus needed to build regularizers and Bregman divergences from it.
///
/// Evaluators are raw: callers are expected to stay inside the stated
/// domains (`u < a` for `psi`/`psi_prime`/`legendre_dual`, `x > 0` for
/// `psi_inv`/`legendre`). The free functions in this module perform the
/// domain checks.
pub trait Potential {
    /// Short identifier used in reports and error messages.
    fn name(&self) -> &'static str;

    /// Upper endpoint `a` of the domain of `ψ` (`f64::INFINITY` if unbounded).
    fn domain_end(&self) -> f64;

    /// `ψ(u)`.
    fn psi(&self, u: f64) -> f64;

    /// `ψ'(u)`.
    fn psi_prime(&self, u: f64) -> f64;

    /// `ψ⁻¹(x)` for `x > 0`.
    fn psi_inv(&self, x: f64) -> f64;

    /// Associated Legendre function `f(x) = ∫ ψ⁻¹(x) dx + C`.
    ///
    /// The integration constant is fixed per instance; it cancels in every
    /// Bregman quantity.
    fn legendre(&self, x: f64) -> f64;

    /// Convex conjugate `f*(u) = sup_{x>0} (x·u - f(x)) = ∫ ψ(u) du - C`.
    fn legendre_dual(&self, u: f64) -> f64;

    /// `f'(x) = ψ⁻¹(x)`.
    fn legendre_prime(&self, x: f64) -> f64 {
        self.psi_inv(x)
    }
}

/// Log-barrier potential `ψ(u) = -1/u` on `(-∞, 0)`.
///
/// Associated function `f(x) = -ln x` (with `f(1) = 0`), dual
/// `f*(u) = -ln(-u)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LogBarrier;

impl Potential for LogBarrier {
    fn name(&self) -> &'static str {
        "log-barrier"
    }

    fn domain_end(&self) -> f64 {
        0.0
    }

    fn psi(&self, u: f64) -> f64 {
        -1.0 / u
    }

    fn psi_prime(&self, u: f64) -> f64 {
        1.0 / (u * u)
    }

    fn psi_inv(&self, x: f64) -> f64 {
        -1.0 / x
    }

    fn legendre(&self, x: f64) -> f64 {
        -x.ln()
    }

    fn legendre_dual(&self, u: f64) -> f64 {
        -(-u).ln()
    }
}

/// Exponential potential `ψ(u) = eᵘ` on all of `ℝ`.
///
/// Associated function is the negative entropy `f(x) = x ln x - x`, dual
/// `f*(u) = eᵘ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Exponential;

impl Potential for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn domain_end(&self) -> f64 {
        f64::INFINITY
    }

    fn psi(&self, u: f64) -> f64 {
        u.exp()
    }

    fn psi_prime(&self, u: f64) -> f64 {
        u.exp()
    }

    fn psi_inv(&self, x: f64) -> f64 {
        x.ln()
    }

    fn legendre(&self, x: f64) -> f64 {
        x * x.ln() - x
    }

    fn legendre_dual(&self, u: f64) -> f64 {
        u.exp()
    }
}

fn check_positive(pot: &impl Potential, label: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!(
            "{label}={v} must be a positive finite real ({} Legendre function is defined on (0, inf))",
            pot.name()
        )));
    }
    Ok(())
}

fn check_in_domain(pot: &impl Potential, label: &str, u: f64) -> Result<()> {
    if !u.is_finite() || u >= pot.domain_end() {
        return Err(Error::Domain(format!(
            "{label}={u} must be a finite real below the domain endpoint a={} of the {} potential",
            pot.domain_end(),
            pot.name()
        )));
    }
    Ok(())
}

/// Bregman divergence of the associated Legendre function:
/// `Breg_f(y‖x) = f(y) - f(x) - f'(x)(y - x)` for `x, y > 0`.
///
/// Nonnegative by convexity; exactly zero when `y == x`.
pub fn bregman(pot: &impl Potential, y: f64, x: f64) -> Result<f64> {
    check_positive(pot, "y", y)?;
    check_positive(pot, "x", x)?;
    if y == x {
        return Ok(0.0);
    }
    let raw = pot.legendre(y) - pot.legendre(x) - pot.legendre_prime(x) * (y - x);
    // Guard against cancellation noise for y ≈ x; the exact value is ≥ 0.
    Ok(raw.max(0.0))
}

/// Bregman divergence of the conjugate:
/// `Breg_f*(u‖v) = f*(u) - f*(v) - ψ(v)(u - v)` for `u, v < a`.
///
/// Under the substitution `x = ψ(u)`, `y = ψ(v)` this equals
/// `bregman(pot, y, x)`; the equality is exercised directly by the
/// verification suite.
pub fn dual_bregman(pot: &impl Potential, u: f64, v: f64) -> Result<f64> {
    check_in_domain(pot, "u", u)?;
    check_in_domain(pot, "v", v)?;
    if u == v {
        return Ok(0.0);
    }
    let raw = pot.legendre_dual(u) - pot.legendre_dual(v) - pot.psi(v) * (u - v);
    Ok(raw.max(0.0))
}

/// A secant-slope certificate for local-norm lower bounds on `Breg_f`.
///
/// Built from a potential and a nonnegative offset function `φ`. With
/// `m(z) = (ψ(z + φ(z)) - ψ(z)) / φ(z)` (the slope of the secant of `ψ`
/// from `z` to `z + φ(z)`), the certificate guarantees
///
/// ```text
/// Breg_f(y‖x) ≥ (x - y)² / (2 m(ψ⁻¹(x)))
/// ```
///
/// for every `x = ψ(u)` in range and every `0 < y ≤ ψ(u + φ(u))`.
/// `m(u) ≥ ψ'(u) > 0` always, so the bound is finite and positive.
pub struct LowerBoundCertificate<P, F> {
    potential: P,
    phi: F,
}

impl<P: Potential, F: Fn(f64) -> f64> LowerBoundCertificate<P, F> {
    pub fn new(potential: P, phi: F) -> Self {
        Self { potential, phi }
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    /// Offset `φ(u)`; must be nonnegative wherever the certificate is used.
    pub fn phi(&self, u: f64) -> f64 {
        (self.phi)(u)
    }

    /// Secant slope `m(z)`; degenerates to `ψ'(z)` when `φ(z) = 0`.
    pub fn slope(&self, z: f64) -> f64 {
        let offset = self.phi(z);
        if offset == 0.0 {
            self.potential.psi_prime(z)
        } else {
            (self.potential.psi(z + offset) - self.potential.psi(z)) / offset
        }
    }

    /// Largest `y` the certificate covers at `u`, namely `ψ(u + φ(u))`.
    pub fn max_valid_y(&self, u: f64) -> f64 {
        self.potential.psi(u + self.phi(u))
    }

    /// The certified lower bound `(x - y)² / (2 m(ψ⁻¹(x)))` on `Breg_f(y‖x)`.
    ///
    /// Errors if `y` is nonpositive or exceeds the validity range at `x`.
    pub fn lower_bound(&self, y: f64, x: f64) -> Result<f64> {
        check_positive(&self.potential, "x", x)?;
        check_positive(&self.potential, "y", y)?;
        let u = self.potential.psi_inv(x);
        let offset = self.phi(u);
        if offset < 0.0 {
            return Err(Error::Domain(format!(
                "certificate offset phi({u}) = {offset} is negative"
            )));
        }
        let max_y = self.max_valid_y(u);
        if y > max_y {
            return Err(Error::CertificateRange { y, max_y });
        }
        let d = x - y;
        Ok(d * d / (2.0 * self.slope(u)))
    }
}

/// Log-barrier certificate with `φ(u) = -1 - u`, valid for `x, y ∈ (0, 1]`.
///
/// The secant slope collapses to `m(ψ⁻¹(x)) = x`, giving the closed-form
/// bound `y/x - 1 - ln(y/x) ≥ (x - y)²/(2x)` on the unit square.
pub fn log_barrier_unit_certificate() -> LowerBoundCertificate<LogBarrier, fn(f64) -> f64> {
    LowerBoundCertificate::new(LogBarrier, |u| -1.0 - u)
}

/// Exponential-potential certificate with constant offset `φ ≡ 1`,
/// `m(z) = eᶻ(e - 1)`, valid for `y ≤ e·x`.
pub fn exponential_unit_certificate() -> LowerBoundCertificate<Exponential, fn(f64) -> f64> {
    LowerBoundCertificate::new(Exponential, |_| 1.0)
}

/// Sum-form simplex regularizer `F(x) = Σᵢ [f(x(i)) - f(1/n)]`.
///
/// Normalized so that `F(uniform) = 0`; Legendre on `(0, ∞)ⁿ`, so iterates
/// normalized through it stay strictly inside the simplex.
#[derive(Debug, Clone, Copy)]
pub struct Regularizer<P> {
    potential: P,
}

impl<P: Potential> Regularizer<P> {
    pub fn new(potential: P) -> Self {
        Self { potential }
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    /// `F(x)`.
    pub fn value(&self, x: &SimplexPoint) -> f64 {
        let n = x.dim() as f64;
        let offset = self.potential.legendre(1.0 / n);
        x.iter()
            .map(|&xi| self.potential.legendre(xi) - offset)
            .sum()
    }

    /// `Breg_F(x‖y) = Σᵢ Breg_f(x(i)‖y(i))` (the `f(1/n)` offsets cancel).
    pub fn bregman(&self, x: &SimplexPoint, y: &SimplexPoint) -> Result<f64> {
        if x.dim() != y.dim() {
            return Err(Error::InvalidParameter(format!(
                "dimension mismatch: {} vs {}",
                x.dim(),
                y.dim()
            )));
        }
        let mut total = 0.0;
        for (&xi, &yi) in x.iter().zip(y.iter()) {
            total += bregman(&self.potential, xi, yi)?;
        }
        Ok(total)
    }

    /// Weighted `(α, β)`-mixed Bregman
    /// `F(x)/α - F(y)/β - (∇F(y)/β)ᵀ(x - y)`.
    ///
    /// Not a divergence: it may be negative when `α ≠ β`. Satisfies
    /// `α · mixed_bregman(α, α, x, y) = Breg_F(x‖y)`.
    pub fn mixed_bregman(
        &self,
        alpha: f64,
        beta: f64,
        x: &SimplexPoint,
        y: &SimplexPoint,
    ) -> Result<f64> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "mixing rates must be positive finite reals, got alpha={alpha}, beta={beta}"
            )));
        }
        if x.dim() != y.dim() {
            return Err(Error::InvalidParameter(format!(
                "dimension mismatch: {} vs {}",
                x.dim(),
                y.dim()
            )));
        }
        let grad_term: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(&xi, &yi)| self.potential.legendre_prime(yi) * (xi - yi))
            .sum();
        Ok(self.value(x) / alpha - self.value(y) / beta - grad_term / beta)
    }
}
