//! Elliptic functions on the period lattice 2π, iβ.
//!
//! Everything here is driven by the nome `q = exp(-β/2)`. The functions are
//! evaluated as truncated q-series or q-products whose length is fixed once,
//! when the [`EllipticContext`] is built, from a [`TruncationPolicy`]:
//! the number of terms `M` is the smallest integer with `q^{2M} < target_eps`.
//!
//! | function | definition |
//! |----------|------------|
//! | `theta(r)` | `sin(r/2) ∏_{m≥1} (1 - 2q^{2m} cos r + q^{4m})` |
//! | `potential(r)` | `Σ_{m∈ℤ} 1 / (4 sin²((r + iβm)/2))` |
//! | `phi(r)` | `∂_r log theta(r)` |
//! | `f(r)` | `-∂_β log theta(r) + 1/12` |
//! | `c0()` | `1/12 - Σ_{m≥1} 1 / (2 sinh²(βm/2))` |
//! | `theta_annulus(z)` | `(1 - z) ∏_{m≥1} (1 - q^{2m} z)(1 - q^{2m}/z)` |
//!
//! The trigonometric limit `q = 0` (β = ∞) is handled by closed forms, not
//! by running the series with zero terms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The constant `c₁`.
pub const C1: f64 = 1.0 / 12.0;

/// Default distance to a pole below which evaluation is refused.
pub const DEFAULT_SINGULARITY_GUARD: f64 = 1e-6;

/// Relative slack used when a point is allowed on the closure of the
/// annulus `q² ≤ |z| ≤ 1`.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Requested bound on the neglected tail.
    pub target_eps: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            target_eps: 1e-16,
            max_terms: 256,
        }
    }
}

impl TruncationPolicy {
    /// Number of terms `M` with `q^{2M} < target_eps`.
    ///
    /// `M` is also large enough that the tail of the steepest series kept
    /// here, `Σ_{m>M} 2m q^{2m}(1 + q^{2m})/(1 − q^{2m})²` from `f`, stays
    /// below `target_eps`; with `a = q²` it is bounded by
    /// `4(M+1) a^{M+1} / (1 − a)⁴`.
    pub fn terms_for(&self, q: f64) -> Result<usize> {
        if q == 0.0 {
            return Ok(0);
        }
        let a = q * q;
        let slack = (1.0 - a).powi(4);
        let mut m = 1;
        let mut am = a;
        while am >= self.target_eps || 4.0 * (m + 1) as f64 * am * a / slack >= self.target_eps {
            m += 1;
            am *= a;
            if m > self.max_terms {
                return Err(Error::Truncation {
                    terms: self.max_terms,
                    target_eps: self.target_eps,
                });
            }
        }
        Ok(m)
    }
}

/// Fixed β (and nome q) together with the truncation data and the cached
/// constant `c₀`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticContext {
    beta: f64,
    q: f64,
    q2: f64,
    policy: TruncationPolicy,
    terms: usize,
    c0: f64,
    singularity_guard: f64,
}

impl EllipticContext {
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_policy(beta, TruncationPolicy::default())
    }

    /// Build from β. `β = +∞` selects the trigonometric limit.
    pub fn with_policy(beta: f64, policy: TruncationPolicy) -> Result<Self> {
        if beta.is_nan() || beta <= 0.0 {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if !(policy.target_eps > 0.0) || policy.max_terms == 0 {
            return Err(Error::Domain(
                "truncation policy needs target_eps > 0 and max_terms > 0".into(),
            ));
        }
        let q = (-beta / 2.0).exp();
        let terms = policy.terms_for(q)?;
        let mut ctx = Self {
            beta,
            q,
            q2: q * q,
            policy,
            terms,
            c0: C1,
            singularity_guard: DEFAULT_SINGULARITY_GUARD,
        };
        ctx.c0 = ctx.compute_c0();
        Ok(ctx)
    }

    /// Build from the nome. `q = 0` is the trigonometric limit. The stored
    /// nome is recomputed from β so that `q == exp(-β/2)` holds bit for bit.
    pub fn from_nome(q: f64, policy: TruncationPolicy) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::Domain(format!("nome must lie in [0, 1), got {q}")));
        }
        let beta = if q == 0.0 { f64::INFINITY } else { -2.0 * q.ln() };
        Self::with_policy(beta, policy)
    }

    pub fn trigonometric() -> Self {
        Self::with_policy(f64::INFINITY, TruncationPolicy::default())
            .expect("trigonometric limit is always constructible")
    }

    /// Same policy and guard, different β.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let mut ctx = Self::with_policy(beta, self.policy)?;
        ctx.singularity_guard = self.singularity_guard;
        Ok(ctx)
    }

    pub fn with_singularity_guard(mut self, guard: f64) -> Self {
        self.singularity_guard = guard;
        self
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_trigonometric(&self) -> bool {
        self.q == 0.0
    }

    /// Number of product/series terms kept.
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn singularity_guard(&self) -> f64 {
        self.singularity_guard
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        C1
    }

    fn compute_c0(&self) -> f64 {
        if self.is_trigonometric() {
            return C1;
        }
        // smallest terms first
        let tail: f64 = (1..=self.terms)
            .rev()
            .map(|m| {
                let s = (self.beta * m as f64 / 2.0).sinh();
                0.5 / (s * s)
            })
            .sum();
        C1 - tail
    }

    /// Iterator over `q^{2m}` for `m = 1..=terms`.
    fn nome_powers(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let q2 = self.q2;
        (1..=self.terms).scan(1.0, move |a, m| {
            *a *= q2;
            Some((m, *a))
        })
    }

    fn check_regular(&self, r: f64) -> Result<()> {
        if !r.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {r}")));
        }
        let d = (r - (r / TAU).round() * TAU).abs();
        if d < self.singularity_guard {
            return Err(Error::Singularity {
                r,
                guard: self.singularity_guard,
            });
        }
        Ok(())
    }

    /// θ(r). Odd, positive on (0, 2π), zero at r = 0.
    pub fn theta(&self, r: f64) -> f64 {
        let (s, c) = ((r / 2.0).sin(), r.cos());
        if self.is_trigonometric() {
            return s;
        }
        s * self
            .nome_powers()
            .map(|(_, a)| 1.0 - 2.0 * a * c + a * a)
            .product::<f64>()
    }

    /// The pair potential V(r) (℘ shifted so that V → 1/(4 sin²(r/2)) as β → ∞).
    ///
    /// The lattice terms m and -m are summed together; with `u = q^{2m} e^{ir}`
    /// their sum is `-2 Re[u / (1 - u)²]`. Summation stops once a pair drops
    /// below `target_eps`.
    pub fn potential(&self, r: f64) -> Result<f64> {
        self.check_regular(r)?;
        let s = (r / 2.0).sin();
        let central = 0.25 / (s * s);
        if self.is_trigonometric() {
            return Ok(central);
        }
        let phase = Complex64::cis(r);
        let mut sum = 0.0;
        let mut a = 1.0;
        for _ in 1..=self.policy.max_terms {
            a *= self.q2;
            let u = phase * a;
            let w = Complex64::new(1.0, 0.0) - u;
            let pair = -2.0 * (u / (w * w)).re;
            sum += pair;
            if pair.abs() < self.policy.target_eps {
                return Ok(central + sum);
            }
        }
        Err(Error::Truncation {
            terms: self.policy.max_terms,
            target_eps: self.policy.target_eps,
        })
    }

    /// φ(r) = ∂_r log θ(r).
    pub fn phi(&self, r: f64) -> Result<f64> {
        self.check_regular(r)?;
        let (sh, ch) = (r / 2.0).sin_cos();
        let head = 0.5 * ch / sh;
        if self.is_trigonometric() {
            return Ok(head);
        }
        let (sr, cr) = r.sin_cos();
        let series: f64 = self
            .nome_powers()
            .map(|(_, a)| 2.0 * a * sr / (1.0 - 2.0 * a * cr + a * a))
            .sum();
        Ok(head + series)
    }

    /// f(r) = -∂_β log θ(r) + c₁, by term-wise differentiation of the product
    /// using ∂_β q^{2m} = -m q^{2m}.
    pub fn f(&self, r: f64) -> Result<f64> {
        self.check_regular(r)?;
        if self.is_trigonometric() {
            return Ok(C1);
        }
        let cr = r.cos();
        let series: f64 = self
            .nome_powers()
            .map(|(m, a)| 2.0 * m as f64 * a * (a - cr) / (1.0 - 2.0 * a * cr + a * a))
            .sum();
        Ok(C1 + series)
    }

    /// ∂_β log θ(r) = c₁ - f(r).
    pub fn beta_log_derivative(&self, r: f64) -> Result<f64> {
        Ok(C1 - self.f(r)?)
    }

    fn check_annulus(&self, z: Complex64, closed: bool) -> Result<()> {
        let m = z.norm();
        let ok = if closed {
            m >= self.q2 * (1.0 - BOUNDARY_SLACK) && m <= 1.0 + BOUNDARY_SLACK && m > 0.0
        } else {
            m > self.q2 && m < 1.0
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "|z| = {m} outside the annulus ({}, 1)",
                self.q2
            )))
        }
    }

    fn theta_annulus_unchecked(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zi = z.inv();
        // one extra factor: |q^{2m}/z| can reach q^{2m-2}
        let mut a = 1.0;
        let mut prod = one - z;
        for _ in 0..=self.terms {
            a *= self.q2;
            if a == 0.0 {
                break;
            }
            prod *= (one - z * a) * (one - zi * a);
        }
        prod
    }

    fn log_theta_annulus_unchecked(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zi = z.inv();
        let mut a = 1.0;
        let mut acc = (one - z).ln();
        for _ in 0..=self.terms {
            a *= self.q2;
            if a == 0.0 {
                break;
            }
            acc += (one - z * a).ln() + (one - zi * a).ln();
        }
        acc
    }

    /// Multiplicative theta `θ̌(z)` on the open annulus `q² < |z| < 1`.
    pub fn theta_annulus(&self, z: Complex64) -> Result<Complex64> {
        self.check_annulus(z, false)?;
        Ok(self.theta_annulus_unchecked(z))
    }

    /// log θ̌(z) as a sum of principal logarithms of the factors. Every factor
    /// has the form `1 - w` with `|w| < 1`, so it lies in the right
    /// half-plane and the sum is analytic on the annulus.
    pub fn log_theta_annulus(&self, z: Complex64) -> Result<Complex64> {
        self.check_annulus(z, false)?;
        Ok(self.log_theta_annulus_unchecked(z))
    }

    /// θ̌ on the closed annulus `q² ≤ |z| ≤ 1`, continuous up to the unit
    /// circle. Meant for continuity checks against the real-argument θ.
    pub fn theta_annulus_closed(&self, z: Complex64) -> Result<Complex64> {
        self.check_annulus(z, true)?;
        Ok(self.theta_annulus_unchecked(z))
    }

    /// Closed-annulus counterpart of [`Self::log_theta_annulus`]; `z = 1` is
    /// a zero of θ̌ and is rejected.
    pub fn log_theta_annulus_closed(&self, z: Complex64) -> Result<Complex64> {
        self.check_annulus(z, true)?;
        if (z - 1.0).norm() < self.singularity_guard {
            return Err(Error::Singularity {
                r: z.arg(),
                guard: self.singularity_guard,
            });
        }
        Ok(self.log_theta_annulus_unchecked(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ctx(beta: f64) -> EllipticContext {
        EllipticContext::new(beta).unwrap()
    }

    /// Brute-force `c₀` with a fixed 200 terms.
    fn c0_oracle(beta: f64) -> f64 {
        C1 - (1..=200)
            .rev()
            .map(|m| 0.5 / (beta * m as f64 / 2.0).sinh().powi(2))
            .sum::<f64>()
    }

    /// Over-truncated product, 200 factors.
    fn theta_oracle(beta: f64, r: f64) -> f64 {
        let q2 = (-beta).exp();
        (1..=200).fold((r / 2.0).sin(), |acc, m| {
            let a = q2.powi(m);
            acc * (1.0 - 2.0 * a * r.cos() + a * a)
        })
    }

    /// Direct lattice sum with complex sine, |m| ≤ 60.
    fn potential_oracle(beta: f64, r: f64) -> f64 {
        (-60..=60)
            .map(|m| {
                let w = Complex64::new(r, beta * m as f64) / 2.0;
                let s = w.sin();
                (s * s * 4.0).inv()
            })
            .sum::<Complex64>()
            .re
    }

    #[test]
    fn nome_is_bit_consistent_with_beta() {
        for beta in [0.7, 2.0, 3.3, 10.0] {
            let c = ctx(beta);
            assert_eq!(c.q(), (-beta / 2.0).exp());
        }
        let c = EllipticContext::from_nome(0.3, TruncationPolicy::default()).unwrap();
        assert_eq!(c.q(), (-c.beta() / 2.0).exp());
        assert!((c.q() - 0.3).abs() < 1e-15);
        let t = EllipticContext::from_nome(0.0, TruncationPolicy::default()).unwrap();
        assert!(t.is_trigonometric());
        assert_eq!(t.beta(), f64::INFINITY);
    }

    #[test]
    fn truncation_rule_and_cap() {
        let c = ctx(2.0);
        let m = c.terms() as i32;
        assert!((-2.0f64).exp().powi(m) < 1e-16);
        assert!(m < 40);
        let tight = TruncationPolicy {
            target_eps: 1e-16,
            max_terms: 3,
        };
        assert!(matches!(
            EllipticContext::with_policy(2.0, tight),
            Err(Error::Truncation { .. })
        ));
        assert!(EllipticContext::new(0.0).is_err());
        assert!(EllipticContext::new(-1.0).is_err());
    }

    #[test]
    fn c0_values() {
        assert_eq!(EllipticContext::trigonometric().c0(), 1.0 / 12.0);
        let c = ctx(2.0);
        assert!((c.c0() - c0_oracle(2.0)).abs() < 1e-16);
        let c8 = ctx(8.0);
        let first = 0.5 / 4.0f64.sinh().powi(2);
        assert!((C1 - c8.c0()).abs() < first * 1.01);
        assert!(c8.c0() < C1);
    }

    #[test]
    fn theta_values() {
        let t = EllipticContext::trigonometric();
        assert_eq!(t.theta(PI), 1.0);
        let c = ctx(3.0);
        assert_eq!(c.theta(1.0), -c.theta(-1.0));
        assert_eq!(c.theta(0.0), 0.0);
        let c = ctx(2.0);
        let r = c.theta(1.3);
        assert!((r - theta_oracle(2.0, 1.3)).abs() < 1e-15 * r.abs());
        for r in [0.1, 1.0, 3.0, 6.0] {
            assert!(c.theta(r) > 0.0);
        }
    }

    #[test]
    fn potential_values() {
        let t = EllipticContext::trigonometric();
        assert_eq!(t.potential(PI).unwrap(), 0.25);
        let c = ctx(2.0);
        assert_eq!(c.potential(1.0).unwrap(), c.potential(-1.0).unwrap());
        let v = c.potential(1.0).unwrap();
        assert!((v - potential_oracle(2.0, 1.0)).abs() < 1e-14 * v.abs());
    }

    #[test]
    fn potential_rejects_poles() {
        let c = ctx(2.0);
        assert!(matches!(c.potential(0.0), Err(Error::Singularity { .. })));
        assert!(matches!(c.potential(TAU + 1e-8), Err(Error::Singularity { .. })));
        assert!(matches!(c.phi(-TAU), Err(Error::Singularity { .. })));
        assert!(c.potential(2e-6).is_ok());
    }

    #[test]
    fn phi_and_f_values() {
        let t = EllipticContext::trigonometric();
        assert!(t.phi(PI).unwrap().abs() < 1e-16);
        assert_eq!(t.f(0.4).unwrap(), C1);
        let c = ctx(3.0);
        assert_eq!(c.phi(0.7).unwrap(), -c.phi(-0.7).unwrap());
        assert_eq!(c.f(0.7).unwrap(), c.f(-0.7).unwrap());
    }

    /// Richardson-extrapolated central difference, independent of the FD
    /// backend used for operators.
    fn richardson_first(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        let d = |h: f64| (g(x - 2.0 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2.0 * h)) / (12.0 * h);
        let (d1, d2) = (d(h), d(h / 2.0));
        (64.0 * d2 - d1) / 63.0
    }

    #[test]
    fn phi_matches_fd_of_log_theta() {
        let c = ctx(2.0);
        let fd = richardson_first(|r| c.theta(r).ln(), 1.0, 1e-3);
        assert!((c.phi(1.0).unwrap() - fd).abs() < 1e-9);
    }

    #[test]
    fn f_matches_fd_in_beta() {
        let fd = richardson_first(|b| ctx(b).theta(1.0).ln(), 2.0, 1e-3);
        let f = ctx(2.0).f(1.0).unwrap();
        assert!((f - (C1 - fd)).abs() < 1e-8);
    }

    #[test]
    fn annulus_theta() {
        let t = EllipticContext::trigonometric();
        let v = t.theta_annulus(Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(v, Complex64::new(0.5, 0.0));

        let c = ctx(2.4);
        let z = Complex64::from_polar(0.6, 0.9);
        let direct = c.theta_annulus(z).unwrap();
        let via_log = c.log_theta_annulus(z).unwrap().exp();
        assert!((direct - via_log).norm() < 1e-14 * direct.norm());

        assert!(c.theta_annulus(Complex64::new(1.0, 0.0)).is_err());
        assert!(c.theta_annulus(Complex64::new(0.5 * c.q() * c.q(), 0.0)).is_err());
        assert!(c.log_theta_annulus(Complex64::new(1.2, 0.0)).is_err());
    }

    #[test]
    fn annulus_theta_on_unit_circle_reproduces_theta() {
        let c = ctx(2.4);
        let x: f64 = 1.1;
        let i = Complex64::i();
        let rhs = i / 2.0 * Complex64::cis(-x / 2.0) * c.theta_annulus_closed(Complex64::cis(x)).unwrap();
        assert!((rhs - c.theta(x)).norm() < 1e-13);
        assert!(rhs.im.abs() < 1e-13);
    }

    #[test]
    fn doubling_terms_changes_nothing() {
        let base = ctx(1.7);
        let doubled = EllipticContext::with_policy(
            1.7,
            TruncationPolicy {
                target_eps: 1e-32,
                max_terms: 512,
            },
        )
        .unwrap();
        assert!(doubled.terms() > base.terms());
        for r in [0.3, 1.9, 4.4] {
            assert!((base.theta(r) - doubled.theta(r)).abs() < 1e-15);
            assert!((base.potential(r).unwrap() - doubled.potential(r).unwrap()).abs() < 1e-14);
            assert!((base.f(r).unwrap() - doubled.f(r).unwrap()).abs() < 1e-15);
        }
        assert!((base.c0() - doubled.c0()).abs() < 1e-16);
    }
}
