//! The two-body/three-body split of 𝒲 = (1/Φ₀) Σ_J (1/m_J) ∂²_J Φ₀.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::states::{Configuration, MassModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenDecomposition {
    /// 𝒲 summed particle by particle from φ and φ' = −V.
    pub per_particle: Complex64,
    /// Two-body part: λ(m_J + m_K)φ' + λ² m_J m_K (m_J + m_K) φ².
    pub two_body: Complex64,
    /// Three-body part: every ordered pair (K, L) about a centre J.
    pub three_body: Complex64,
    /// Σ_{J<K} [γ_JK V − 2λ²|m| m_J m_K f − λ² c₀ m_J m_K (m_J + m_K)].
    pub closed_form: Complex64,
    /// Σ_{J<K} γ_JK V(X_J − X_K).
    pub potential: Complex64,
}

impl SenDecomposition {
    /// (ℋΦ₀)/Φ₀ = −𝒲 + Σ γ V, with 𝒲 taken from the closed form.
    pub fn calh_ratio(&self) -> Complex64 {
        self.potential - self.closed_form
    }
}

pub fn decompose_sen(model: &MassModel, ctx: &EllipticContext, cfg: &Configuration) -> Result<SenDecomposition> {
    let x = cfg.coords();
    let m = model.masses();
    let n = m.len();
    if x.len() != n {
        return Err(Error::Constraint(format!(
            "{} coordinates for {n} particles",
            x.len()
        )));
    }
    let lam = model.lambda();
    let zero = Complex64::new(0.0, 0.0);
    let phi = |a: usize, b: usize| ctx.phi(x[a] - x[b]);
    let v = |a: usize, b: usize| ctx.potential(x[a] - x[b]);

    let mut per_particle = zero;
    for j in 0..n {
        let mut first = zero;
        let mut grad = zero;
        for k in (0..n).filter(|&k| k != j) {
            first -= lam * m[k] * v(j, k)?;
            grad += lam * m[k] * phi(j, k)?;
        }
        per_particle += first + m[j] * grad * grad;
    }

    let mut two_body = zero;
    let mut closed_form = zero;
    let mut potential = zero;
    let m1 = model.power_sum(1);
    for k in 0..n {
        for j in k + 1..n {
            let p = phi(j, k)?;
            let vjk = v(j, k)?;
            let s = m[j] + m[k];
            two_body += -lam * s * vjk + lam * lam * m[j] * m[k] * s * p * p;
            let gv = model.coupling(j, k) * vjk;
            potential += gv;
            closed_form += gv
                - 2.0 * lam * lam * m1 * m[j] * m[k] * ctx.f(x[j] - x[k])?
                - lam * lam * ctx.c0() * m[j] * m[k] * s;
        }
    }

    let mut three_body = zero;
    for j in 0..n {
        for k in j + 1..n {
            for l in k + 1..n {
                let cyc = phi(j, k)? * phi(j, l)? + phi(k, l)? * phi(k, j)? + phi(l, j)? * phi(l, k)?;
                three_body += 2.0 * lam * lam * m[j] * m[k] * m[l] * cyc;
            }
        }
    }

    Ok(SenDecomposition {
        per_particle,
        two_body,
        three_body,
        closed_form,
        potential,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_add_up() {
        let ctx = EllipticContext::new(2.3).unwrap();
        let model = MassModel::new(
            Complex64::new(1.1, 0.3),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(-0.6, 0.2),
                Complex64::new(0.9, 0.0),
                Complex64::new(0.4, -0.5),
            ],
        )
        .unwrap();
        let cfg = Configuration::new(vec![5.5, 3.9, 2.0, 0.7], 0.2).unwrap();
        let d = decompose_sen(&model, &ctx, &cfg).unwrap();
        let scale = 1.0 + d.per_particle.norm();
        assert!((d.per_particle - d.two_body - d.three_body).norm() < 1e-12 * scale);
        assert!((d.per_particle - d.closed_form).norm() < 1e-10 * scale);
    }
}
