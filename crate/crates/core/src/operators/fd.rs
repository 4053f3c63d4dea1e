//! Finite-difference backend. Works on point values only: the state is
//! reached exclusively through `Wavefunction::eval_at`, β-derivatives by
//! rebuilding the elliptic context at shifted β.

use num_complex::Complex64;

use super::{BackendKind, Hamiltonian, OperatorApplication};
use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::fd::StencilSpec;
use crate::states::{Configuration, Wavefunction};

fn check_step(spec: &StencilSpec, cfg: &Configuration) -> Result<()> {
    spec.validate()?;
    if spec.h > cfg.min_sep() / 10.0 {
        return Err(Error::Constraint(format!(
            "stencil step {} exceeds min_sep/10 = {}",
            spec.h,
            cfg.min_sep() / 10.0
        )));
    }
    Ok(())
}

pub(super) fn apply(
    h: &Hamiltonian,
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    spec: &StencilSpec,
) -> Result<OperatorApplication> {
    check_step(spec, cfg)?;
    let x0 = cfg.coords();
    let centre = state.eval_at(ctx, x0)?;
    if centre == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("state vanishes at the configuration".into()));
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut largest = 0.0f64;
    let mut error = 0.0;
    for (j, kin) in h.kinetic().iter().enumerate() {
        if *kin == Complex64::new(0.0, 0.0) {
            continue;
        }
        let line = |x: f64| {
            let mut pt = x0.to_vec();
            pt[j] = x;
            state.eval_at(ctx, &pt)
        };
        let est = spec.second(line, x0[j], centre)?;
        let term = kin * est.value / centre;
        largest = largest.max(term.norm());
        error += kin.norm() * est.error / centre.norm();
        value += term;
    }
    let (pot, pot_largest) = h.potential(ctx, x0)?;
    Ok(OperatorApplication {
        value: value + pot,
        scale: 1.0 + largest.max(pot_largest),
        backend: BackendKind::Fd,
        error_estimate: error,
    })
}

pub(super) fn beta_derivative(
    state: &dyn Wavefunction,
    ctx: &EllipticContext,
    cfg: &Configuration,
    spec: &StencilSpec,
) -> Result<OperatorApplication> {
    spec.validate()?;
    let beta = ctx.beta();
    if spec.reach() >= beta / 2.0 {
        return Err(Error::Constraint(format!("beta step {} too large for beta = {beta}", spec.h)));
    }
    let x0 = cfg.coords();
    let centre = state.eval_at(ctx, x0)?;
    if centre == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate("state vanishes at the configuration".into()));
    }
    let est = spec.first(|b| state.eval_at(&ctx.with_beta(b)?, x0), beta)?;
    let value = est.value / centre;
    Ok(OperatorApplication {
        value,
        scale: 1.0 + value.norm(),
        backend: BackendKind::Fd,
        error_estimate: est.error / centre.norm(),
    })
}
