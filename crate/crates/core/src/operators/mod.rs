//! Hamiltonians and their application to states.
//!
//! A [`Hamiltonian`] is stored as one kinetic coefficient per coordinate
//! (the operator is `Σ_J kinetic_J ∂²_J`) plus pair potentials
//! `strength · V(X_a − X_b)`. Both ℋ and the deformed operators H_{N,Ñ}
//! fit this form.
//!
//! Two backends compute the local ratio `(HΨ)/Ψ`:
//! * analytic: closed-form log-derivatives of a [`ProductState`]
//!   (φ for first derivatives, φ' = −V for second, f for ∂_β);
//! * finite differences: stencils on [`Wavefunction::eval_at`] only.

mod analytic;
mod decomposition;
mod fd;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use decomposition::{decompose_sen, SenDecomposition};

use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::fd::StencilSpec;
use crate::states::{Configuration, DeformedModel, Group, MassModel, Side, Wavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub a: usize,
    pub b: usize,
    pub strength: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    kinetic: Vec<Complex64>,
    couplings: Vec<PairCoupling>,
}

impl Hamiltonian {
    pub fn new(kinetic: Vec<Complex64>, couplings: Vec<PairCoupling>) -> Result<Self> {
        let dim = kinetic.len();
        if let Some(p) = couplings.iter().find(|p| p.a >= dim || p.b >= dim || p.a == p.b) {
            return Err(Error::Constraint(format!(
                "coupling ({}, {}) does not fit {dim} coordinates",
                p.a, p.b
            )));
        }
        Ok(Self { kinetic, couplings })
    }

    /// ℋ = −Σ_J (1/m_J) ∂²_J + Σ_{J<K} γ_JK V(X_J − X_K).
    pub fn many_body(model: &MassModel) -> Self {
        let m = model.masses();
        let kinetic = m.iter().map(|mj| -mj.inv()).collect();
        let couplings = (0..m.len())
            .flat_map(|a| (a + 1..m.len()).map(move |b| (a, b)))
            .map(|(a, b)| PairCoupling {
                a,
                b,
                strength: model.coupling(a, b),
            })
            .collect();
        Self { kinetic, couplings }
    }

    /// H_{N,Ñ} with coupling λ acting on the coordinates `x` (species with
    /// kinetic term −∂²) and `xt` (species with +λ∂²), inside a system of
    /// `dim` coordinates.
    pub fn deformed_on(x: &[usize], xt: &[usize], lambda: Complex64, dim: usize) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let mut kinetic = vec![Complex64::new(0.0, 0.0); dim];
        let mut couplings = Vec::new();
        let mut push = |a: usize, b: usize, s: Complex64| {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            couplings.push(PairCoupling { a, b, strength: s });
        };
        for (i, &a) in x.iter().enumerate() {
            for &b in &x[i + 1..] {
                push(a, b, 2.0 * lambda * (lambda - one));
            }
            for &b in xt {
                push(a, b, 2.0 * (one - lambda));
            }
        }
        for (i, &a) in xt.iter().enumerate() {
            for &b in &xt[i + 1..] {
                push(a, b, 2.0 * (lambda - one) / lambda);
            }
        }
        for &a in x {
            *kinetic.get_mut(a).ok_or_else(|| Error::Constraint(format!("index {a} out of range")))? = -one;
        }
        for &a in xt {
            *kinetic.get_mut(a).ok_or_else(|| Error::Constraint(format!("index {a} out of range")))? = lambda;
        }
        Self::new(kinetic, couplings)
    }

    /// H_{N,Ñ}(x, x̃) (left) or H_{M,M̃}(y, ỹ) (right) on the model layout.
    pub fn deformed(model: &DeformedModel, side: Side) -> Self {
        let (g, gt) = match side {
            Side::Left => (Group::X, Group::XTilde),
            Side::Right => (Group::Y, Group::YTilde),
        };
        let x: Vec<usize> = model.group_range(g).collect();
        let xt: Vec<usize> = model.group_range(gt).collect();
        Self::deformed_on(&x, &xt, model.lambda, model.dim()).expect("layout indices are in range")
    }

    /// H_left − H_right.
    pub fn kernel_difference(model: &DeformedModel) -> Self {
        Self::deformed(model, Side::Left).minus(&Self::deformed(model, Side::Right))
    }

    pub fn minus(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "operators act on different systems");
        let kinetic = self.kinetic.iter().zip(&other.kinetic).map(|(a, b)| a - b).collect();
        let mut couplings = self.couplings.clone();
        couplings.extend(other.couplings.iter().map(|p| PairCoupling {
            strength: -p.strength,
            ..*p
        }));
        Self { kinetic, couplings }
    }

    pub fn dim(&self) -> usize {
        self.kinetic.len()
    }

    pub fn kinetic(&self) -> &[Complex64] {
        &self.kinetic
    }

    pub fn couplings(&self) -> &[PairCoupling] {
        &self.couplings
    }

    /// Σ strength·V and the largest single |strength·V|.
    pub(crate) fn potential(&self, ctx: &EllipticContext, coords: &[f64]) -> Result<(Complex64, f64)> {
        let mut total = Complex64::new(0.0, 0.0);
        let mut largest = 0.0f64;
        for p in &self.couplings {
            if p.strength == Complex64::new(0.0, 0.0) {
                continue;
            }
            let term = p.strength * ctx.potential(coords[p.a] - coords[p.b])?;
            largest = largest.max(term.norm());
            total += term;
        }
        Ok((total, largest))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Analytic,
    FiniteDifference(StencilSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Analytic,
    Fd,
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Analytic => BackendKind::Analytic,
            Backend::FiniteDifference(_) => BackendKind::Fd,
        }
    }
}

/// A local ratio `(OΨ)/Ψ` at one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorApplication {
    pub value: Complex64,
    /// 1 + the largest single contribution to `value`; always ≥ 1.
    pub scale: f64,
    pub backend: BackendKind,
    /// Absolute error estimate; zero for the analytic backend.
    pub error_estimate: f64,
}

fn check_dims(h: &Hamiltonian, state: &dyn Wavefunction, cfg: &Configuration) -> Result<()> {
    if h.dim() != state.dim() || cfg.len() != state.dim() {
        return Err(Error::Constraint(format!(
            "operator on {} coordinates, state on {}, configuration has {}",
            h.dim(),
            state.dim(),
            cfg.len()
        )));
    }
    Ok(())
}

/// `(HΨ)/Ψ` at `cfg`.
pub fn apply(
    h: &Hamiltonian,
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<OperatorApplication> {
    check_dims(h, state, cfg)?;
    match backend {
        Backend::Analytic => {
            let product = state.as_product().ok_or(Error::NotProductState)?;
            analytic::apply(h, product, ctx, cfg)
        }
        Backend::FiniteDifference(spec) => fd::apply(h, state, ctx, cfg, &spec),
    }
}

/// `(ℋΨ)/Ψ`.
pub fn apply_calh(
    model: &MassModel,
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<OperatorApplication> {
    apply(&Hamiltonian::many_body(model), state, ctx, cfg, backend)
}

/// `(H_{N,Ñ}Ψ)/Ψ` or `(H_{M,M̃}Ψ)/Ψ` on the layout of `model`.
pub fn apply_h_deformed(
    model: &DeformedModel,
    side: Side,
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<OperatorApplication> {
    apply(&Hamiltonian::deformed(model, side), state, ctx, cfg, backend)
}

/// `(∂_βΨ)/Ψ`.
pub fn beta_derivative(
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    backend: Backend,
) -> Result<OperatorApplication> {
    if ctx.is_trigonometric() {
        return Err(Error::Domain("no beta-derivative at the trigonometric limit".into()));
    }
    if cfg.len() != state.dim() {
        return Err(Error::Constraint(format!(
            "state on {} coordinates, configuration has {}",
            state.dim(),
            cfg.len()
        )));
    }
    match backend {
        Backend::Analytic => {
            let product = state.as_product().ok_or(Error::NotProductState)?;
            analytic::beta_derivative(product, ctx, cfg)
        }
        Backend::FiniteDifference(spec) => fd::beta_derivative(state, ctx, cfg, &spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build_kernel_f, build_phi0, build_psi0, ProductState};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fd() -> Backend {
        Backend::FiniteDifference(StencilSpec::default())
    }

    #[test]
    fn constant_state_single_particle() {
        let ctx = EllipticContext::new(2.0).unwrap();
        let model = MassModel::new(c(1.0), vec![Complex64::new(0.4, 0.2)]).unwrap();
        let cfg = Configuration::new(vec![1.0], 0.2).unwrap();
        let s = ProductState::constant(1);
        for b in [Backend::Analytic, fd()] {
            let r = apply_calh(&model, &s, &ctx, &cfg, b).unwrap();
            assert!(r.value.norm() <= 1e-12 + r.error_estimate, "{b:?}: {r:?}");
            assert!(r.scale >= 1.0);
        }
    }

    #[test]
    fn plane_wave_kinetic_energy() {
        let ctx = EllipticContext::new(2.0).unwrap();
        let m1 = c(0.8);
        let k = 1.7;
        let model = MassModel::new(c(1.0), vec![m1]).unwrap();
        let cfg = Configuration::new(vec![2.2], 0.2).unwrap();
        let s = ProductState::constant(1).with_momentum(&[c(k)]).unwrap();
        let expect = k * k / m1.re;
        for b in [Backend::Analytic, fd()] {
            let r = apply_calh(&model, &s, &ctx, &cfg, b).unwrap();
            assert!((r.value - expect).norm() < 1e-8, "{b:?}: {r:?}");
        }
    }

    #[test]
    fn analytic_requires_product_state() {
        struct Opaque;
        impl Wavefunction for Opaque {
            fn dim(&self) -> usize {
                1
            }
            fn eval_at(&self, _: &EllipticContext, x: &[f64]) -> Result<Complex64> {
                Ok(c(x[0].cos()))
            }
        }
        let ctx = EllipticContext::new(2.0).unwrap();
        let model = MassModel::new(c(1.0), vec![c(1.0)]).unwrap();
        let cfg = Configuration::new(vec![0.3], 0.2).unwrap();
        assert_eq!(
            apply_calh(&model, &Opaque, &ctx, &cfg, Backend::Analytic),
            Err(Error::NotProductState)
        );
        let r = apply_calh(&model, &Opaque, &ctx, &cfg, fd()).unwrap();
        assert!((r.value - 1.0).norm() < 1e-8);
    }

    #[test]
    fn free_deformed_operator_at_unit_coupling() {
        let ctx = EllipticContext::new(2.5).unwrap();
        let model = DeformedModel::single(3, 0, c(1.0)).unwrap();
        let cfg = Configuration::new(vec![3.0, 2.0, 1.0], 0.2).unwrap();
        let s = ProductState::constant(3);
        let r = apply_h_deformed(&model, Side::Left, &s, &ctx, &cfg, Backend::Analytic).unwrap();
        assert_eq!(r.value, c(0.0));
    }

    #[test]
    fn difference_variable_is_annihilated() {
        let ctx = EllipticContext::new(2.5).unwrap();
        let model = DeformedModel::single(1, 1, c(1.0)).unwrap();
        let psi = build_psi0(1, 1, c(1.0)).unwrap();
        let cfg = Configuration::new(vec![2.4, 0.9], 0.2).unwrap();
        for b in [Backend::Analytic, fd()] {
            let r = apply_h_deformed(&model, Side::Left, &psi, &ctx, &cfg, b).unwrap();
            assert!(r.value.norm() < 1e-12 * r.scale.max(1.0) + r.error_estimate, "{b:?}: {r:?}");
        }
    }

    #[test]
    fn embedding_reproduces_operator_difference() {
        let ctx = EllipticContext::new(2.2).unwrap();
        let lam = Complex64::new(0.8, 0.3);
        let model = DeformedModel::new(2, 1, 1, 2, lam).unwrap();
        let f = build_kernel_f(&model);
        let cfg = Configuration::new(vec![5.6, 4.7, 3.5, 2.6, 1.4, 0.5], 0.2).unwrap();
        let calh = apply_calh(&model.embedding(), &f, &ctx, &cfg, Backend::Analytic).unwrap();
        let left = apply_h_deformed(&model, Side::Left, &f, &ctx, &cfg, Backend::Analytic).unwrap();
        let right = apply_h_deformed(&model, Side::Right, &f, &ctx, &cfg, Backend::Analytic).unwrap();
        assert!((calh.value - (left.value - right.value)).norm() < 1e-10 * calh.scale);
    }

    #[test]
    fn beta_derivative_of_pair_state() {
        let ctx = EllipticContext::new(2.0).unwrap();
        let lam = c(1.3);
        let (m1, m2) = (c(0.7), c(-1.2));
        let model = MassModel::new(lam, vec![m1, m2]).unwrap();
        let s = build_phi0(&model);
        let cfg = Configuration::new(vec![2.9, 1.1], 0.2).unwrap();
        let expect = -lam * m1 * m2 * (ctx.f(1.8).unwrap() - ctx.c1());
        let a = beta_derivative(&s, &ctx, &cfg, Backend::Analytic).unwrap();
        assert!((a.value - expect).norm() < 1e-15);
        let n = beta_derivative(&s, &ctx, &cfg, fd()).unwrap();
        assert!((n.value - expect).norm() < 1e-7);
        let flat = ProductState::constant(2);
        assert_eq!(beta_derivative(&flat, &ctx, &cfg, Backend::Analytic).unwrap().value, c(0.0));
        let trig = EllipticContext::trigonometric();
        assert!(matches!(
            beta_derivative(&s, &trig, &cfg, Backend::Analytic),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let ctx = EllipticContext::new(2.0).unwrap();
        let model = MassModel::new(c(1.0), vec![c(1.0), c(2.0)]).unwrap();
        let cfg = Configuration::new(vec![1.0], 0.2).unwrap();
        let s = ProductState::constant(1);
        assert!(matches!(
            apply_calh(&model, &s, &ctx, &cfg, Backend::Analytic),
            Err(Error::Constraint(_))
        ));
    }
}
