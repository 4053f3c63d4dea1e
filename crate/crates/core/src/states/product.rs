use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::model::{DeformedModel, Group, MassModel};
use crate::elliptic::{EllipticContext, C1};
use crate::error::{Error, Result};

/// Anything that can be evaluated pointwise. The finite-difference backend
/// only ever talks to states through this trait.
pub trait Wavefunction: Sync {
    /// Number of coordinates.
    fn dim(&self) -> usize;

    fn eval_at(&self, ctx: &EllipticContext, coords: &[f64]) -> Result<Complex64>;

    /// The closed-form representation, when there is one.
    fn as_product(&self) -> Option<&ProductState> {
        None
    }
}

/// Points on the circle, with the minimal pair separation they were drawn
/// with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    coords: Vec<f64>,
    min_sep: f64,
}

/// Distance from `d` to the nearest multiple of 2π.
pub fn periodic_distance(d: f64) -> f64 {
    (d - (d / TAU).round() * TAU).abs()
}

impl Configuration {
    /// Rejects configurations with two points closer than `min_sep` on the
    /// circle.
    pub fn new(coords: Vec<f64>, min_sep: f64) -> Result<Self> {
        if !(min_sep > 0.0) {
            return Err(Error::Constraint(format!("min_sep must be positive, got {min_sep}")));
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {x}")));
        }
        for a in 0..coords.len() {
            for b in a + 1..coords.len() {
                let d = coords[a] - coords[b];
                if periodic_distance(d) < min_sep {
                    return Err(Error::Singularity { r: d, guard: min_sep });
                }
            }
        }
        Ok(Self { coords, min_sep })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn min_sep(&self) -> f64 {
        self.min_sep
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// The same points moved by `a` along the diagonal.
    pub fn translated(&self, a: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|x| x + a).collect(),
            min_sep: self.min_sep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Role {
    pub group: Option<Group>,
    pub mass: Option<Complex64>,
}

/// θ(X_a − X_b)^exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairFactor {
    pub a: usize,
    pub b: usize,
    pub exponent: Complex64,
}

/// `prefactor · exp(i k·X) · ∏ θ(X_a − X_b)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    prefactor: Complex64,
    factors: Vec<PairFactor>,
    momentum: Vec<Complex64>,
    roles: Vec<Role>,
}

/// ∂_J log Ψ and ∂²_J log Ψ for every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDerivatives {
    pub gradient: Vec<Complex64>,
    pub second: Vec<Complex64>,
}

fn is_integer(p: Complex64) -> bool {
    p.im == 0.0 && p.re.fract() == 0.0
}

impl ProductState {
    pub fn from_parts(prefactor: Complex64, factors: Vec<PairFactor>, roles: Vec<Role>) -> Result<Self> {
        if prefactor == Complex64::new(0.0, 0.0) {
            return Err(Error::Constraint("prefactor must be non-zero".into()));
        }
        let dim = roles.len();
        for f in &factors {
            if f.a >= dim || f.b >= dim || f.a == f.b {
                return Err(Error::Constraint(format!(
                    "pair factor ({}, {}) does not fit {dim} coordinates",
                    f.a, f.b
                )));
            }
        }
        Ok(Self {
            prefactor,
            factors,
            momentum: vec![Complex64::new(0.0, 0.0); dim],
            roles,
        })
    }

    /// The constant function 1 on `dim` coordinates.
    pub fn constant(dim: usize) -> Self {
        Self {
            prefactor: Complex64::new(1.0, 0.0),
            factors: Vec::new(),
            momentum: vec![Complex64::new(0.0, 0.0); dim],
            roles: vec![Role { group: None, mass: None }; dim],
        }
    }

    pub fn prefactor(&self) -> Complex64 {
        self.prefactor
    }

    pub fn factors(&self) -> &[PairFactor] {
        &self.factors
    }

    pub fn momentum(&self) -> &[Complex64] {
        &self.momentum
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    /// Multiply by `exp(i k·X)`.
    pub fn with_momentum(mut self, k: &[Complex64]) -> Result<Self> {
        if k.len() != self.roles.len() {
            return Err(Error::Constraint(format!(
                "momentum has {} components, state has {} coordinates",
                k.len(),
                self.roles.len()
            )));
        }
        for (p, kj) in self.momentum.iter_mut().zip(k) {
            *p += kj;
        }
        Ok(self)
    }

    fn check_dim(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.roles.len() {
            return Err(Error::Constraint(format!(
                "configuration has {} coordinates, state expects {}",
                coords.len(),
                self.roles.len()
            )));
        }
        Ok(())
    }

    /// log|Ψ|-style accumulation with an explicit sign for integer powers of
    /// negative θ. Non-integer powers need θ > 0, i.e. X_a − X_b in (0, 2π).
    fn log_value(&self, ctx: &EllipticContext, coords: &[f64]) -> Result<(Complex64, f64)> {
        self.check_dim(coords)?;
        let mut log = Complex64::new(0.0, 0.0);
        let mut sign = 1.0;
        for f in &self.factors {
            let d = coords[f.a] - coords[f.b];
            if periodic_distance(d) < ctx.singularity_guard() {
                return Err(Error::Singularity {
                    r: d,
                    guard: ctx.singularity_guard(),
                });
            }
            let th = ctx.theta(d);
            if th > 0.0 {
                log += f.exponent * th.ln();
            } else if is_integer(f.exponent) {
                log += f.exponent * (-th).ln();
                if f.exponent.re.rem_euclid(2.0) == 1.0 {
                    sign = -sign;
                }
            } else {
                return Err(Error::Domain(format!(
                    "X_{} - X_{} = {d} is outside (0, 2π); non-integer power {} is undefined there",
                    f.a + 1,
                    f.b + 1,
                    f.exponent
                )));
            }
        }
        for (k, x) in self.momentum.iter().zip(coords) {
            log += Complex64::i() * k * x;
        }
        Ok((log, sign))
    }

    pub fn eval(&self, ctx: &EllipticContext, cfg: &Configuration) -> Result<Complex64> {
        self.eval_at(ctx, cfg.coords())
    }

    /// ∂_J log Ψ = i k_J ± Σ p φ(X_a − X_b) over factors touching J.
    pub fn log_grad(&self, ctx: &EllipticContext, cfg: &Configuration, j: usize) -> Result<Complex64> {
        let coords = cfg.coords();
        self.check_dim(coords)?;
        let mut g = Complex64::i() * self.momentum[j];
        for f in &self.factors {
            if f.a == j {
                g += f.exponent * ctx.phi(coords[f.a] - coords[f.b])?;
            } else if f.b == j {
                g -= f.exponent * ctx.phi(coords[f.a] - coords[f.b])?;
            }
        }
        Ok(g)
    }

    /// First and second log-derivatives in every coordinate, using φ' = −V.
    pub fn log_derivatives(&self, ctx: &EllipticContext, cfg: &Configuration) -> Result<LogDerivatives> {
        let coords = cfg.coords();
        self.check_dim(coords)?;
        let dim = coords.len();
        let mut gradient: Vec<Complex64> = self.momentum.iter().map(|k| Complex64::i() * k).collect();
        let mut second = vec![Complex64::new(0.0, 0.0); dim];
        for f in &self.factors {
            let d = coords[f.a] - coords[f.b];
            let (phi, v) = (ctx.phi(d)?, ctx.potential(d)?);
            gradient[f.a] += f.exponent * phi;
            gradient[f.b] -= f.exponent * phi;
            second[f.a] -= f.exponent * v;
            second[f.b] -= f.exponent * v;
        }
        Ok(LogDerivatives { gradient, second })
    }

    /// ∂_β log Ψ = Σ p (c₁ − f(X_a − X_b)).
    pub fn log_beta_deriv(&self, ctx: &EllipticContext, cfg: &Configuration) -> Result<Complex64> {
        let coords = cfg.coords();
        self.check_dim(coords)?;
        self.factors.iter().try_fold(Complex64::new(0.0, 0.0), |acc, f| {
            Ok(acc + f.exponent * (C1 - ctx.f(coords[f.a] - coords[f.b])?))
        })
    }
}

impl Wavefunction for ProductState {
    fn dim(&self) -> usize {
        self.roles.len()
    }

    fn eval_at(&self, ctx: &EllipticContext, coords: &[f64]) -> Result<Complex64> {
        let (log, sign) = self.log_value(ctx, coords)?;
        Ok(self.prefactor * log.exp() * sign)
    }

    fn as_product(&self) -> Option<&ProductState> {
        Some(self)
    }
}

/// Φ₀ = ∏_{J<K} θ(X_J − X_K)^{λ m_J m_K}.
pub fn build_phi0(model: &MassModel) -> ProductState {
    let m = model.masses();
    let lambda = model.lambda();
    let factors = (0..m.len())
        .flat_map(|a| (a + 1..m.len()).map(move |b| (a, b)))
        .map(|(a, b)| PairFactor {
            a,
            b,
            exponent: lambda * m[a] * m[b],
        })
        .collect();
    let roles = m
        .iter()
        .map(|&mass| Role {
            group: None,
            mass: Some(mass),
        })
        .collect();
    ProductState::from_parts(Complex64::new(1.0, 0.0), factors, roles).expect("indices are in range")
}

/// Exponent of θ(u − w) for u in group `ga` preceding w in group `gb`.
fn deformed_exponent(ga: Group, gb: Group, lambda: Complex64) -> Complex64 {
    use Group::*;
    let one = Complex64::new(1.0, 0.0);
    match (ga, gb) {
        (X, X) | (Y, Y) => lambda,
        (XTilde, XTilde) | (YTilde, YTilde) => lambda.inv(),
        (X, XTilde) | (Y, YTilde) => -one,
        (X, Y) => -lambda,
        (XTilde, YTilde) => -lambda.inv(),
        (X, YTilde) | (XTilde, Y) => one,
        _ => unreachable!("pairs are visited in layout order"),
    }
}

/// F_{N,Ñ,M,M̃}: the product of Ψ₀^{N,Ñ}(x, x̃), Ψ₀^{M,M̃}(y, ỹ) and the
/// cross factors between the two blocks.
pub fn build_kernel_f(model: &DeformedModel) -> ProductState {
    let dim = model.dim();
    let factors = (0..dim)
        .flat_map(|a| (a + 1..dim).map(move |b| (a, b)))
        .map(|(a, b)| PairFactor {
            a,
            b,
            exponent: deformed_exponent(model.group_of(a), model.group_of(b), model.lambda),
        })
        .collect();
    let roles = (0..dim)
        .map(|i| {
            let g = model.group_of(i);
            Role {
                group: Some(g),
                mass: Some(model.group_mass(g)),
            }
        })
        .collect();
    ProductState::from_parts(Complex64::new(1.0, 0.0), factors, roles).expect("indices are in range")
}

/// Ψ₀^{N,Ñ}(x, x̃).
pub fn build_psi0(n: usize, n_tilde: usize, lambda: Complex64) -> Result<ProductState> {
    Ok(build_kernel_f(&DeformedModel::single(n, n_tilde, lambda)?))
}

/// Multiply by `c · exp(i v Σ_J m_J X_J)`, i.e. `c·e^{iv[|x| − |y| − (|x̃| − |ỹ|)/λ]}`
/// for the deformed layouts.
pub fn dress_plane_wave(state: &ProductState, v: f64, c: Complex64) -> Result<ProductState> {
    if c == Complex64::new(0.0, 0.0) {
        return Err(Error::Constraint("dressing constant must be non-zero".into()));
    }
    let k = state
        .roles
        .iter()
        .enumerate()
        .map(|(j, r)| {
            r.mass
                .map(|m| m * v)
                .ok_or_else(|| Error::Constraint(format!("coordinate {} has no mass assigned", j + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = state.clone().with_momentum(&k)?;
    out.prefactor *= c;
    Ok(out)
}
