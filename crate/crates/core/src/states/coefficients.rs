//! Laurent coefficients of the θ̌-product and the eigenfunctions built from
//! them.
//!
//! For `z_j = e^{i x_j}`, `z̃_J = e^{i x̃_J}` the integrand
//!
//! ```text
//! g(ξ) = ∏_j θ̌(z_j/ξ)^{-λ} ∏_J θ̌(z̃_J/ξ)
//! ```
//!
//! is analytic on `1 < |ξ| < 1/q²`, where it equals `Σ_n ξ^{-n} P_n`. The
//! coefficients are extracted with the trapezoidal rule on a circle
//! `|ξ| = R`, which converges geometrically in the number of nodes.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::DeformedModel;
use super::product::{build_psi0, ProductState, Wavefunction};
use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Number of trapezoidal nodes K (even, ≥ 16).
    pub nodes: usize,
    /// Contour radius; `None` picks the geometric mean 1/q of the annulus
    /// bounds, or 2 in the trigonometric limit.
    pub radius: Option<f64>,
    /// Allowed relative disagreement between the K- and K/2-node rules.
    pub check_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 256,
            radius: None,
            check_tol: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn resolve_radius(&self, ctx: &EllipticContext) -> Result<f64> {
        let outer = if ctx.is_trigonometric() {
            f64::INFINITY
        } else {
            1.0 / (ctx.q() * ctx.q())
        };
        let r = self
            .radius
            .unwrap_or(if ctx.is_trigonometric() { 2.0 } else { 1.0 / ctx.q() });
        if !(r > 1.0 && r < outer && r.is_finite()) {
            return Err(Error::Quadrature(format!(
                "contour radius {r} outside the annulus (1, {outer})"
            )));
        }
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < 16 || !self.nodes.is_multiple_of(2) {
            return Err(Error::Quadrature(format!(
                "need an even number of at least 16 nodes, got {}",
                self.nodes
            )));
        }
        Ok(())
    }
}

/// `e^{ix}` for each x.
pub fn unit_points(xs: &[f64]) -> Vec<Complex64> {
    xs.iter().map(|&x| Complex64::cis(x)).collect()
}

fn integrand(
    ctx: &EllipticContext,
    lambda: Complex64,
    z: &[Complex64],
    zt: &[Complex64],
    xi: Complex64,
    closed: bool,
) -> Result<Complex64> {
    type Factor = fn(&EllipticContext, Complex64) -> Result<Complex64>;
    let (log_theta, theta): (Factor, Factor) =
        if closed {
            (EllipticContext::log_theta_annulus_closed, EllipticContext::theta_annulus_closed)
        } else {
            (EllipticContext::log_theta_annulus, EllipticContext::theta_annulus)
        };
    let mut log = Complex64::new(0.0, 0.0);
    for &zj in z {
        log -= lambda * log_theta(ctx, zj / xi)?;
    }
    let mut prod = log.exp();
    for &zj in zt {
        prod *= theta(ctx, zj / xi)?;
    }
    Ok(prod)
}

/// g(ξ) for `1 < |ξ| < 1/q²`, with each power `θ̌^{-λ}` taken through the
/// principal-log branch of [`EllipticContext::log_theta_annulus`].
pub fn annulus_integrand(
    ctx: &EllipticContext,
    lambda: Complex64,
    z: &[Complex64],
    zt: &[Complex64],
    xi: Complex64,
) -> Result<Complex64> {
    integrand(ctx, lambda, z, zt, xi, false)
}

/// g(ξ) continued to `|ξ| = 1` (points `z_j = ξ` excluded).
pub fn annulus_integrand_on_circle(
    ctx: &EllipticContext,
    lambda: Complex64,
    z: &[Complex64],
    zt: &[Complex64],
    xi: Complex64,
) -> Result<Complex64> {
    integrand(ctx, lambda, z, zt, xi, true)
}

/// Coefficients `P_n` for a contiguous range of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentCoefficients {
    pub n_start: i64,
    pub values: Vec<Complex64>,
    pub radius: f64,
    pub nodes: usize,
    /// max |g| over the contour.
    pub max_integrand: f64,
}

impl LaurentCoefficients {
    pub fn get(&self, n: i64) -> Option<Complex64> {
        let i = n.checked_sub(self.n_start)?;
        usize::try_from(i).ok().and_then(|i| self.values.get(i).copied())
    }

    pub fn range(&self) -> RangeInclusive<i64> {
        self.n_start..=self.n_start + self.values.len() as i64 - 1
    }

    /// Bound `R^n max|g|` on |P_n| implied by the contour.
    pub fn scale(&self, n: i64) -> f64 {
        self.radius.powi(n as i32) * self.max_integrand
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (self.n_start + i as i64, *v))
    }
}

/// `P_n = (1/K) Σ_k ξ_k^n g(ξ_k)` with `ξ_k = R e^{2πik/K}`.
///
/// The even-indexed nodes form the K/2-node rule; the two are compared for
/// every n and a mismatch beyond `quad.check_tol · R^n max|g|` is an error.
pub fn pn_coefficients(
    ctx: &EllipticContext,
    lambda: Complex64,
    z: &[Complex64],
    zt: &[Complex64],
    n_range: RangeInclusive<i64>,
    quad: &QuadratureSpec,
) -> Result<LaurentCoefficients> {
    quad.validate()?;
    let radius = quad.resolve_radius(ctx)?;
    let k = quad.nodes;
    let samples = (0..k)
        .map(|j| annulus_integrand(ctx, lambda, z, zt, Complex64::from_polar(radius, TAU * j as f64 / k as f64)))
        .collect::<Result<Vec<_>>>()?;
    let max_integrand = samples.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let n_start = *n_range.start();
    let mut values = Vec::new();
    for n in n_range {
        let (mut full, mut half) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (j, g) in samples.iter().enumerate() {
            let idx = (j as i64 * n).rem_euclid(k as i64);
            let term = Complex64::cis(TAU * idx as f64 / k as f64) * g;
            full += term;
            if j % 2 == 0 {
                half += term;
            }
        }
        let rn = radius.powi(n as i32);
        let (full, half) = (full * rn / k as f64, half * rn * 2.0 / k as f64);
        let scale = rn * max_integrand;
        if (full - half).norm() > quad.check_tol * scale {
            return Err(Error::Quadrature(format!(
                "P_{n}: {k}-node and {}-node rules differ by {:e} (scale {scale:e})",
                k / 2,
                (full - half).norm()
            )));
        }
        values.push(full);
    }
    Ok(LaurentCoefficients {
        n_start,
        values,
        radius,
        nodes: k,
        max_integrand,
    })
}

/// Coefficients at real positions `x`, `x̃` (mapped to the unit circle).
pub fn pn_coefficients_at(
    ctx: &EllipticContext,
    lambda: Complex64,
    x: &[f64],
    xt: &[f64],
    n_range: RangeInclusive<i64>,
    quad: &QuadratureSpec,
) -> Result<LaurentCoefficients> {
    pn_coefficients(ctx, lambda, &unit_points(x), &unit_points(xt), n_range, quad)
}

/// Partial Laurent sum `Σ ξ^{-n} P_n` over the stored range.
pub fn reconstruct_annulus_product(
    ctx: &EllipticContext,
    coefficients: &LaurentCoefficients,
    xi: Complex64,
) -> Result<Complex64> {
    let outer = if ctx.is_trigonometric() {
        f64::INFINITY
    } else {
        1.0 / (ctx.q() * ctx.q())
    };
    let r = xi.norm();
    if !(r > 1.0 && r < outer) {
        return Err(Error::Domain(format!("|xi| = {r} outside (1, {outer})")));
    }
    Ok(coefficients.iter().map(|(n, p)| xi.powi(-(n as i32)) * p).sum())
}

/// Ψ_n = Ψ₀^{N,Ñ}(x, x̃) P_n(z, z̃) at λ = Ñ/(N − 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentEigenstate {
    base: ProductState,
    n_x: usize,
    n_xt: usize,
    lambda: Complex64,
    n: i64,
    quad: QuadratureSpec,
}

impl LaurentEigenstate {
    pub fn new(n_x: usize, n_xt: usize, n: i64, quad: QuadratureSpec) -> Result<Self> {
        if n_x < 2 || n_xt < 1 {
            return Err(Error::Constraint(format!(
                "Laurent eigenfunctions need N >= 2 and Ntilde >= 1, got ({n_x}, {n_xt})"
            )));
        }
        let lambda = Complex64::new(n_xt as f64 / (n_x - 1) as f64, 0.0);
        Ok(Self {
            base: build_psi0(n_x, n_xt, lambda)?,
            n_x,
            n_xt,
            lambda,
            n,
            quad,
        })
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn label(&self) -> i64 {
        self.n
    }

    /// The left-side model (N, Ñ, 0, 0, λ) the state is an eigenfunction of.
    pub fn model(&self) -> DeformedModel {
        DeformedModel::single(self.n_x, self.n_xt, self.lambda).expect("validated on construction")
    }

    pub fn base(&self) -> &ProductState {
        &self.base
    }

    /// P_n at the given coordinates, together with the coefficient scale.
    pub fn coefficient_at(&self, ctx: &EllipticContext, coords: &[f64]) -> Result<(Complex64, f64)> {
        let (x, xt) = coords.split_at(self.n_x);
        let c = pn_coefficients_at(ctx, self.lambda, x, xt, self.n..=self.n, &self.quad)?;
        Ok((c.values[0], c.scale(self.n)))
    }
}

impl Wavefunction for LaurentEigenstate {
    fn dim(&self) -> usize {
        self.n_x + self.n_xt
    }

    fn eval_at(&self, ctx: &EllipticContext, coords: &[f64]) -> Result<Complex64> {
        let (p, _) = self.coefficient_at(ctx, coords)?;
        Ok(self.base.eval_at(ctx, coords)? * p)
    }
}
