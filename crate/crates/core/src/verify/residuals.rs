//! Pointwise residuals of the identities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::constants::{constant_c, dressing_shift_c, energy_e0_cor2, energy_e0_prop1, energy_en_cor3};
use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::fd::StencilSpec;
use crate::operators::{
    apply, apply_calh, apply_h_deformed, beta_derivative, Backend, BackendKind, Hamiltonian, OperatorApplication,
};
use crate::states::{
    build_kernel_f, build_phi0, build_psi0, dress_plane_wave, Configuration, DeformedModel, LaurentEigenstate,
    MassModel, QuadratureSpec, Side, Wavefunction,
};

/// A signed residual with the scale it is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: Complex64,
    pub scale: f64,
    pub backend: BackendKind,
    /// Propagated finite-difference error estimate (0 for analytic).
    pub error_estimate: f64,
}

impl Residual {
    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    pub fn rel(&self) -> f64 {
        self.abs() / self.scale
    }
}

/// `ratio + coef·(∂_βΨ)/Ψ − constant`, skipping the β-term when its
/// coefficient vanishes or there is no β to vary.
fn assemble(
    op: OperatorApplication,
    coef: Complex64,
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
    constant: Complex64,
) -> Result<Residual> {
    let mut value = op.value - constant;
    let mut scale = op.scale.max(1.0 + constant.norm());
    let mut error = op.error_estimate;
    // At q = 0 every β-dependent series term is identically zero.
    if coef != Complex64::new(0.0, 0.0) && !ctx.is_trigonometric() {
        let b = beta_derivative(state, ctx, cfg, backend)?;
        let term = coef * b.value;
        value += term;
        scale = scale.max(1.0 + term.norm());
        error += coef.norm() * b.error_estimate;
    }
    Ok(Residual {
        value,
        scale,
        backend: op.backend,
        error_estimate: error,
    })
}

/// `(ℋ + 2λ|m|∂_β − ℰ₀)Φ₀ / Φ₀`.
pub fn residual_prop1(
    model: &MassModel,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<Residual> {
    let phi0 = build_phi0(model);
    let op = apply_calh(model, &phi0, ctx, cfg, backend)?;
    let coef = 2.0 * model.lambda() * model.power_sum(1);
    assemble(op, coef, &phi0, ctx, cfg, backend, energy_e0_prop1(model, ctx))
}

/// Plane-wave dressing `c·e^{iv(|x| − |y| − (|x̃| − |ỹ|)/λ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dressing {
    pub v: f64,
    pub c: Complex64,
}

/// `(H_left − H_right + 2[(N − M)λ − Ñ + M̃]∂_β − C)F / F`, with the
/// dressed constant when `dressing` is given.
pub fn residual_cor1(
    model: &DeformedModel,
    ctx: &EllipticContext,
    cfg: &Configuration,
    dressing: Option<Dressing>,
    backend: Backend,
) -> Result<Residual> {
    let mut state = build_kernel_f(model);
    let mut constant = constant_c(model, ctx);
    if let Some(d) = dressing {
        state = dress_plane_wave(&state, d.v, d.c)?;
        constant += dressing_shift_c(model, d.v);
    }
    let left = apply_h_deformed(model, Side::Left, &state, ctx, cfg, backend)?;
    let right = apply_h_deformed(model, Side::Right, &state, ctx, cfg, backend)?;
    let op = OperatorApplication {
        value: left.value - right.value,
        scale: left.scale.max(right.scale),
        backend: left.backend,
        error_estimate: left.error_estimate + right.error_estimate,
    };
    assemble(op, model.beta_coefficient(), &state, ctx, cfg, backend, constant)
}

/// Rejects λ ≠ expected.
fn require_lambda(lambda: Complex64, expected: f64, what: &str) -> Result<()> {
    if (lambda - expected).norm() > 1e-12 * expected.abs().max(1.0) {
        return Err(Error::Constraint(format!("{what} requires lambda = {expected}, got {lambda}")));
    }
    Ok(())
}

/// `(H_{N,Ñ}Ψ₀)/Ψ₀ − E₀` at λ = Ñ/N.
pub fn residual_cor2(
    n: usize,
    n_tilde: usize,
    lambda: Complex64,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<Residual> {
    if n == 0 {
        return Err(Error::Constraint("N must be positive".into()));
    }
    require_lambda(lambda, n_tilde as f64 / n as f64, "the single-species eigenfunction")?;
    let model = DeformedModel::single(n, n_tilde, lambda)?;
    let psi = build_psi0(n, n_tilde, lambda)?;
    let op = apply_h_deformed(&model, Side::Left, &psi, ctx, cfg, backend)?;
    let e0 = Complex64::new(energy_e0_cor2(n, n_tilde, ctx)?, 0.0);
    assemble(op, Complex64::new(0.0, 0.0), &psi, ctx, cfg, backend, e0)
}

/// Relative size below which P_n counts as vanishing at a configuration.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// `(H_{N,Ñ}Ψ_n)/Ψ_n − E(n)` with finite differences on the full Ψ_n
/// (the coefficient is re-extracted at every stencil point).
pub fn residual_cor3(
    n_x: usize,
    n_tilde: usize,
    n: i64,
    ctx: &EllipticContext,
    cfg: &Configuration,
    quad: &QuadratureSpec,
    stencil: StencilSpec,
) -> Result<Residual> {
    let state = LaurentEigenstate::new(n_x, n_tilde, n, *quad)?;
    if cfg.len() != state.dim() {
        return Err(Error::Constraint(format!(
            "{} coordinates for N + Ntilde = {}",
            cfg.len(),
            state.dim()
        )));
    }
    let (p, scale) = state.coefficient_at(ctx, cfg.coords())?;
    if !(p.norm() >= DEGENERACY_THRESHOLD * scale) {
        return Err(Error::Degenerate(format!(
            "|P_{n}| = {:e} below {DEGENERACY_THRESHOLD:e} x scale {scale:e}",
            p.norm()
        )));
    }
    let h = Hamiltonian::deformed(&state.model(), Side::Left);
    let op = apply(&h, &state, ctx, cfg, Backend::FiniteDifference(stencil))?;
    let e = Complex64::new(energy_en_cor3(n_x, n_tilde, n, ctx)?, 0.0);
    assemble(op, Complex64::new(0.0, 0.0), &state, ctx, cfg, Backend::FiniteDifference(stencil), e)
}

/// `(H_{Ñ,N}(x̃, x; 1/λ) + (1/λ)H_{N,Ñ}(x, x̃; λ))ψ / ψ` for any state ψ
/// on N + Ñ coordinates laid out as (x, x̃).
pub fn residual_duality(
    n: usize,
    n_tilde: usize,
    lambda: Complex64,
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<Residual> {
    let dim = n + n_tilde;
    let x: Vec<usize> = (0..n).collect();
    let xt: Vec<usize> = (n..dim).collect();
    let direct = apply(&Hamiltonian::deformed_on(&x, &xt, lambda, dim)?, state, ctx, cfg, backend)?;
    let dual = apply(&Hamiltonian::deformed_on(&xt, &x, lambda.inv(), dim)?, state, ctx, cfg, backend)?;
    let scaled = direct.value / lambda;
    Ok(Residual {
        value: dual.value + scaled,
        scale: dual.scale.max(1.0 + scaled.norm()),
        backend: direct.backend,
        error_estimate: dual.error_estimate + direct.error_estimate / lambda.norm(),
    })
}
