//! Closed-form eigenvalues and identity constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::states::{DeformedModel, MassModel};

/// β-dependent redefinition `V → V + b0`, `θ → B₁θ` with `b1 = ∂_β log B₁`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub b0: f64,
    pub b1: f64,
}

/// ℰ₀ = λ²[(|m²||m| − |m³|)c₀ + (|m|² − |m²|)|m|c₁].
pub fn energy_e0_prop1(model: &MassModel, ctx: &EllipticContext) -> Complex64 {
    let (m1, m2, m3) = (model.power_sum(1), model.power_sum(2), model.power_sum(3));
    let lam = model.lambda();
    lam * lam * ((m2 * m1 - m3) * ctx.c0() + (m1 * m1 - m2) * m1 * ctx.c1())
}

/// ℰ₀ as the pair sum Σ_{J<K} λ² m_J m_K [(m_J + m_K)c₀ + 2|m|c₁].
pub fn energy_e0_double_sum(model: &MassModel, ctx: &EllipticContext) -> Complex64 {
    let m = model.masses();
    let lam2 = model.lambda() * model.lambda();
    let m1 = model.power_sum(1);
    let mut e = Complex64::new(0.0, 0.0);
    for j in 0..m.len() {
        for k in j + 1..m.len() {
            e += lam2 * m[j] * m[k] * ((m[j] + m[k]) * ctx.c0() + 2.0 * m1 * ctx.c1());
        }
    }
    e
}

/// The constant C_{N,Ñ,M,M̃} of the kernel-function identity.
pub fn constant_c(model: &DeformedModel, ctx: &EllipticContext) -> Complex64 {
    let (n, nt, m, mt) = (
        model.n as f64,
        model.n_tilde as f64,
        model.m as f64,
        model.m_tilde as f64,
    );
    let lam = model.lambda;
    let (d, dt) = (n - m, nt - mt);
    let a0 = (n * (n - 1.0) - m * (m - 1.0)) * lam * lam - (n + m) * dt * lam + d * (nt + mt)
        - (nt * (nt - 1.0) - mt * (mt - 1.0)) / lam;
    let a1 = d * (d * d - n - m) * lam * lam - (3.0 * d * d - n - m) * dt * lam
        + d * (3.0 * dt * dt - nt - mt)
        - dt * (dt * dt - nt - mt) / lam;
    a0 * ctx.c0() + a1 * ctx.c1()
}

/// ℰ₀ when |m| = 0: −λ²|m³|c₀.
pub fn reduced_e0(model: &MassModel, ctx: &EllipticContext) -> Complex64 {
    -model.lambda() * model.lambda() * model.power_sum(3) * ctx.c0()
}

/// C when (N − M)λ = Ñ − M̃: [−λ²(N − M) + (Ñ − M̃)/λ]c₀.
pub fn reduced_c(model: &DeformedModel, ctx: &EllipticContext) -> Complex64 {
    let lam = model.lambda;
    let d = model.n as f64 - model.m as f64;
    let dt = model.n_tilde as f64 - model.m_tilde as f64;
    (-lam * lam * d + dt / lam) * ctx.c0()
}

/// E₀ = (N − Ñ²/N)c₀ of Ψ₀ at λ = Ñ/N.
pub fn energy_e0_cor2(n: usize, n_tilde: usize, ctx: &EllipticContext) -> Result<f64> {
    if n == 0 {
        return Err(Error::Constraint("N must be positive".into()));
    }
    let (n, nt) = (n as f64, n_tilde as f64);
    Ok((n - nt * nt / n) * ctx.c0())
}

/// E(n) = n² + (N − 1 − Ñ²/(N − 1))c₀ of Ψ_n at λ = Ñ/(N − 1).
pub fn energy_en_cor3(n_x: usize, n_tilde: usize, n: i64, ctx: &EllipticContext) -> Result<f64> {
    if n_x < 2 {
        return Err(Error::Constraint(format!("N must be at least 2, got {n_x}")));
    }
    let (p, nt) = ((n_x - 1) as f64, n_tilde as f64);
    Ok((n * n) as f64 + (p - nt * nt / p) * ctx.c0())
}

/// ℰ₀ after the redefinition described by `shift`.
pub fn shifted_e0(model: &MassModel, ctx: &EllipticContext, shift: ShiftSpec) -> Complex64 {
    let (m1, m2, m3) = (model.power_sum(1), model.power_sum(2), model.power_sum(3));
    let lam = model.lambda();
    let count = model.particle_count() as f64;
    energy_e0_prop1(model, ctx)
        - (lam * lam * (m2 * m1 - m3) - lam * (count - 1.0) * m1) * shift.b0
        - lam * lam * (m1 * m1 - m2) * m1 * shift.b1
}

/// The same shift written as pair sums: ℰ₀ − Σγ_JK b₀ − 2λ|m| Σ λ m_J m_K b₁.
pub fn shifted_e0_pair_sum(model: &MassModel, ctx: &EllipticContext, shift: ShiftSpec) -> Complex64 {
    let m = model.masses();
    let lam = model.lambda();
    let m1 = model.power_sum(1);
    let mut e = energy_e0_prop1(model, ctx);
    for j in 0..m.len() {
        for k in j + 1..m.len() {
            e -= model.coupling(j, k) * shift.b0 + 2.0 * lam * m1 * lam * m[j] * m[k] * shift.b1;
        }
    }
    e
}

/// ℰ₀ with the standard Weierstrass normalisation: λ(𝒩 − 1)|m|c₀.
pub fn standard_e0(model: &MassModel, ctx: &EllipticContext) -> Complex64 {
    let count = model.particle_count() as f64;
    model.lambda() * (count - 1.0) * model.power_sum(1) * ctx.c0()
}

/// C with the standard normalisation: (N + Ñ + M + M̃ − 1)[λ(N − M) − Ñ + M̃]c₀.
pub fn standard_c(model: &DeformedModel, ctx: &EllipticContext) -> Complex64 {
    let total = model.dim() as f64;
    (total - 1.0) * model.imbalance() * ctx.c0()
}

/// Change of ℰ₀ under `Φ₀ → cΦ₀e^{iv Σ m_J X_J}`: |m|v².
pub fn dressing_shift_e0(model: &MassModel, v: f64) -> Complex64 {
    model.power_sum(1) * v * v
}

/// Change of C under the plane-wave dressing: [N − M − (Ñ − M̃)/λ]v².
pub fn dressing_shift_c(model: &DeformedModel, v: f64) -> Complex64 {
    let d = model.n as f64 - model.m as f64;
    let dt = model.n_tilde as f64 - model.m_tilde as f64;
    (d - dt / model.lambda) * v * v
}
