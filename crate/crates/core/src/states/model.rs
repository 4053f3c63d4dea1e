use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Species tag of a coordinate in the deformed models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    X,
    XTilde,
    Y,
    YTilde,
}

/// Particle number, coupling and masses of the many-body operator ℋ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassModel {
    lambda: Complex64,
    masses: Vec<Complex64>,
    power_sums: [Complex64; 3],
}

impl MassModel {
    pub fn new(lambda: Complex64, masses: Vec<Complex64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::Constraint("at least one particle is required".into()));
        }
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::Constraint("coupling lambda must be non-zero".into()));
        }
        if let Some(j) = masses.iter().position(|m| *m == Complex64::new(0.0, 0.0)) {
            return Err(Error::Constraint(format!("mass m_{} is zero", j + 1)));
        }
        let power_sums = [1, 2, 3].map(|n| masses.iter().map(|m| m.powi(n)).sum());
        Ok(Self {
            lambda,
            masses,
            power_sums,
        })
    }

    /// Number of particles 𝒩.
    pub fn particle_count(&self) -> usize {
        self.masses.len()
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn masses(&self) -> &[Complex64] {
        &self.masses
    }

    /// |mⁿ| = Σ_J m_Jⁿ for n = 1, 2, 3.
    pub fn power_sum(&self, n: usize) -> Complex64 {
        assert!((1..=3).contains(&n), "power sums are cached for n = 1, 2, 3");
        self.power_sums[n - 1]
    }

    /// γ_JK = λ(m_J + m_K)(λ m_J m_K − 1).
    pub fn coupling(&self, j: usize, k: usize) -> Complex64 {
        let (mj, mk) = (self.masses[j], self.masses[k]);
        self.lambda * (mj + mk) * (self.lambda * mj * mk - 1.0)
    }
}

/// Which operator of a kernel-function identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Group sizes (N, Ñ, M, M̃) and coupling λ of a pair of deformed operators.
///
/// Coordinates are laid out as `x₁..x_N, x̃₁..x̃_Ñ, y₁..y_M, ỹ₁..ỹ_M̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformedModel {
    pub n: usize,
    pub n_tilde: usize,
    pub m: usize,
    pub m_tilde: usize,
    pub lambda: Complex64,
}

impl DeformedModel {
    pub fn new(n: usize, n_tilde: usize, m: usize, m_tilde: usize, lambda: Complex64) -> Result<Self> {
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::Constraint("coupling lambda must be non-zero".into()));
        }
        if n + n_tilde + m + m_tilde == 0 {
            return Err(Error::Constraint("the model needs at least one coordinate".into()));
        }
        Ok(Self {
            n,
            n_tilde,
            m,
            m_tilde,
            lambda,
        })
    }

    /// Only the left block, as used for single-operator eigenvalue problems.
    pub fn single(n: usize, n_tilde: usize, lambda: Complex64) -> Result<Self> {
        Self::new(n, n_tilde, 0, 0, lambda)
    }

    pub fn dim(&self) -> usize {
        self.n + self.n_tilde + self.m + self.m_tilde
    }

    /// Flat index ranges of the four groups.
    pub fn group_range(&self, g: Group) -> std::ops::Range<usize> {
        let starts = [
            0,
            self.n,
            self.n + self.n_tilde,
            self.n + self.n_tilde + self.m,
            self.dim(),
        ];
        let i = match g {
            Group::X => 0,
            Group::XTilde => 1,
            Group::Y => 2,
            Group::YTilde => 3,
        };
        starts[i]..starts[i + 1]
    }

    pub fn group_of(&self, index: usize) -> Group {
        [Group::X, Group::XTilde, Group::Y, Group::YTilde]
            .into_iter()
            .find(|g| self.group_range(*g).contains(&index))
            .expect("index within model dimension")
    }

    /// Mass assigned to each group when the pair is embedded into ℋ:
    /// 1, −1/λ, −1, 1/λ.
    pub fn group_mass(&self, g: Group) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match g {
            Group::X => one,
            Group::XTilde => -self.lambda.inv(),
            Group::Y => -one,
            Group::YTilde => self.lambda.inv(),
        }
    }

    /// The mass model whose ℋ equals H_left − H_right.
    pub fn embedding(&self) -> MassModel {
        let masses = (0..self.dim()).map(|i| self.group_mass(self.group_of(i))).collect();
        MassModel::new(self.lambda, masses).expect("embedding masses are non-zero")
    }

    /// (N − M)λ − (Ñ − M̃), snapped to zero when it vanishes up to rounding.
    pub fn imbalance(&self) -> Complex64 {
        let a = self.lambda * (self.n as f64 - self.m as f64);
        let b = self.n_tilde as f64 - self.m_tilde as f64;
        let d = a - b;
        if d.norm() <= 4.0 * f64::EPSILON * a.norm().max(b.abs()) {
            Complex64::new(0.0, 0.0)
        } else {
            d
        }
    }

    /// (N − M)λ = Ñ − M̃: no β-derivative term in the identity.
    pub fn is_balanced(&self) -> bool {
        self.imbalance() == Complex64::new(0.0, 0.0)
    }

    /// Coefficient 2[(N − M)λ − Ñ + M̃] of ∂/∂β.
    pub fn beta_coefficient(&self) -> Complex64 {
        2.0 * self.imbalance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_sums_and_couplings() {
        let m = MassModel::new(c(1.3, -0.4), vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.37, 0.2)]).unwrap();
        assert_eq!(m.particle_count(), 3);
        let expect = c(0.37, 0.2);
        assert!((m.power_sum(1) - expect).norm() < 1e-15);
        assert!((m.power_sum(3) - expect.powi(3)).norm() < 1e-15);
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(m.coupling(j, k), m.coupling(k, j));
            }
        }
        // m_J = 1, m_K = -1 decouple
        assert_eq!(m.coupling(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn rejects_zero_parameters() {
        assert!(MassModel::new(c(0.0, 0.0), vec![c(1.0, 0.0)]).is_err());
        assert!(MassModel::new(c(1.0, 0.0), vec![c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(MassModel::new(c(1.0, 0.0), vec![]).is_err());
        assert!(DeformedModel::new(0, 0, 0, 0, c(1.0, 0.0)).is_err());
        assert!(DeformedModel::new(0, 0, 1, 0, c(1.0, 0.0)).is_ok());
        assert!(DeformedModel::new(1, 0, 1, 0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn embedding_layout() {
        let d = DeformedModel::new(2, 1, 1, 2, c(0.5, 0.0)).unwrap();
        assert_eq!(d.dim(), 6);
        assert_eq!(d.group_range(Group::Y), 3..4);
        let e = d.embedding();
        let masses: Vec<f64> = e.masses().iter().map(|m| m.re).collect();
        assert_eq!(masses, vec![1.0, 1.0, -2.0, -1.0, 2.0, 2.0]);
        // cross-group couplings between the two sides vanish
        for a in 0..3 {
            for b in 3..6 {
                assert!(e.coupling(a, b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn balance_flag() {
        assert!(DeformedModel::new(2, 1, 1, 0, c(1.0, 0.0)).unwrap().is_balanced());
        assert!(DeformedModel::new(3, 2, 0, 0, c(2.0 / 3.0, 0.0)).unwrap().is_balanced());
        let d = DeformedModel::new(1, 0, 1, 0, c(0.7, 0.0)).unwrap();
        assert!(d.is_balanced());
        let d = DeformedModel::new(2, 0, 1, 0, c(0.7, 0.0)).unwrap();
        assert!(!d.is_balanced());
        assert!((d.beta_coefficient() - c(1.4, 0.0)).norm() < 1e-15);
        // |m| of the embedding equals the β-coefficient over 2λ
        let e = d.embedding();
        assert!((e.power_sum(1) * 2.0 * d.lambda - d.beta_coefficient()).norm() < 1e-14);
    }
}
