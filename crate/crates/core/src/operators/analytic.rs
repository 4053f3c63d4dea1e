use num_complex::Complex64;

use super::{BackendKind, Hamiltonian, OperatorApplication};
use crate::elliptic::EllipticContext;
use crate::error::Result;
use crate::states::{Configuration, ProductState};

/// (1/Ψ)∂²_JΨ = ∂²_J log Ψ + (∂_J log Ψ)².
pub(super) fn apply(
    h: &Hamiltonian,
    state: &ProductState,
    ctx: &EllipticContext,
    cfg: &Configuration,
) -> Result<OperatorApplication> {
    let logs = state.log_derivatives(ctx, cfg)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut largest = 0.0f64;
    for (j, kin) in h.kinetic().iter().enumerate() {
        if *kin == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (second, grad_sq) = (kin * logs.second[j], kin * logs.gradient[j] * logs.gradient[j]);
        largest = largest.max(second.norm()).max(grad_sq.norm());
        value += second + grad_sq;
    }
    let (pot, pot_largest) = h.potential(ctx, cfg.coords())?;
    Ok(OperatorApplication {
        value: value + pot,
        scale: 1.0 + largest.max(pot_largest),
        backend: BackendKind::Analytic,
        error_estimate: 0.0,
    })
}

pub(super) fn beta_derivative(
    state: &ProductState,
    ctx: &EllipticContext,
    cfg: &Configuration,
) -> Result<OperatorApplication> {
    let value = state.log_beta_deriv(ctx, cfg)?;
    Ok(OperatorApplication {
        value,
        scale: 1.0 + value.norm(),
        backend: BackendKind::Analytic,
        error_estimate: 0.0,
    })
}
