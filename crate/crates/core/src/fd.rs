//! Central finite differences with Richardson extrapolation.
//!
//! These helpers only ever see a callable; they know nothing about θ-series
//! or their closed-form derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StencilSpec {
    /// Formal accuracy order of the base stencil: 2, 4 or 6.
    pub order: u8,
    pub h: f64,
    pub richardson_levels: u32,
}

impl Default for StencilSpec {
    fn default() -> Self {
        Self {
            order: 4,
            h: 1e-3,
            richardson_levels: 1,
        }
    }
}

/// A derivative value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

// Half-stencil weights for offsets 1..=k; the centre weight is implied.
const FIRST: [&[f64]; 3] = [
    &[1.0 / 2.0],
    &[2.0 / 3.0, -1.0 / 12.0],
    &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
];
const SECOND: [&[f64]; 3] = [
    &[1.0],
    &[4.0 / 3.0, -1.0 / 12.0],
    &[3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
];

impl StencilSpec {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.order, 2 | 4 | 6) {
            return Err(Error::Constraint(format!(
                "finite-difference order must be 2, 4 or 6, got {}",
                self.order
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::Constraint(format!("step must be positive, got {}", self.h)));
        }
        if self.richardson_levels > 6 {
            return Err(Error::Constraint("at most 6 Richardson levels".into()));
        }
        Ok(())
    }

    fn weights(&self, table: [&'static [f64]; 3]) -> &'static [f64] {
        table[(self.order / 2 - 1) as usize]
    }

    /// Widest offset used, in units of the base step.
    pub fn reach(&self) -> f64 {
        (self.order / 2) as f64 * self.h
    }

    /// d/dx g at x.
    pub fn first<G>(&self, g: G, x: f64) -> Result<Estimate>
    where
        G: Fn(f64) -> Result<Complex64>,
    {
        self.validate()?;
        let w = self.weights(FIRST);
        let mut mag = 0.0f64;
        let raw = |h: f64, mag: &mut f64| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, wk) in w.iter().enumerate() {
                let s = (k + 1) as f64 * h;
                let (p, m) = (g(x + s)?, g(x - s)?);
                *mag = mag.max(p.norm()).max(m.norm());
                acc += (p - m) * *wk;
            }
            Ok(acc / h)
        };
        let roundoff_weight: f64 = 2.0 * w.iter().map(|v| v.abs()).sum::<f64>();
        let finest = self.h / 2f64.powi(self.richardson_levels as i32);
        let mut e = self.extrapolate(|h| raw(h, &mut mag))?;
        e.error += 8.0 * f64::EPSILON * mag * roundoff_weight / finest;
        Ok(e)
    }

    /// d²/dx² g at x. `centre` is g(x), passed in so callers can reuse it.
    pub fn second<G>(&self, g: G, x: f64, centre: Complex64) -> Result<Estimate>
    where
        G: Fn(f64) -> Result<Complex64>,
    {
        self.validate()?;
        let w = self.weights(SECOND);
        let w0: f64 = -2.0 * w.iter().sum::<f64>();
        let mut mag = centre.norm();
        let raw = |h: f64, mag: &mut f64| -> Result<Complex64> {
            let mut acc = centre * w0;
            for (k, wk) in w.iter().enumerate() {
                let s = (k + 1) as f64 * h;
                let (p, m) = (g(x + s)?, g(x - s)?);
                *mag = mag.max(p.norm()).max(m.norm());
                acc += (p + m) * *wk;
            }
            Ok(acc / (h * h))
        };
        let roundoff_weight: f64 = w0.abs() + 2.0 * w.iter().map(|v| v.abs()).sum::<f64>();
        let finest = self.h / 2f64.powi(self.richardson_levels as i32);
        let mut e = self.extrapolate(|h| raw(h, &mut mag))?;
        e.error += 8.0 * f64::EPSILON * mag * roundoff_weight / (finest * finest);
        Ok(e)
    }

    /// Richardson tableau over steps h, h/2, ...; error terms of central
    /// stencils are even powers starting at h^order.
    fn extrapolate<D>(&self, mut raw: D) -> Result<Estimate>
    where
        D: FnMut(f64) -> Result<Complex64>,
    {
        let levels = self.richardson_levels as usize;
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(levels + 1);
        for i in 0..=levels {
            let h = self.h / 2f64.powi(i as i32);
            let mut row = vec![raw(h)?];
            for j in 1..=i {
                let factor = 2f64.powi(self.order as i32 + 2 * (j as i32 - 1));
                let better = (row[j - 1] * factor - rows[i - 1][j - 1]) / (factor - 1.0);
                row.push(better);
            }
            rows.push(row);
        }
        let best = rows[levels][levels];
        let error = if levels == 0 {
            0.0
        } else {
            (best - rows[levels - 1][levels - 1]).norm()
        };
        Ok(Estimate { value: best, error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn first_derivative_of_sine() {
        for order in [2, 4, 6] {
            let spec = StencilSpec {
                order,
                h: 1e-2,
                richardson_levels: 2,
            };
            let e = spec.first(|x| Ok(c(x.sin())), 0.7).unwrap();
            assert!((e.value.re - 0.7f64.cos()).abs() < 1e-10, "order {order}: {e:?}");
            assert!(e.error < 1e-6);
        }
    }

    #[test]
    fn second_derivative_of_exponential() {
        for order in [2, 4, 6] {
            let spec = StencilSpec {
                order,
                h: 1e-2,
                richardson_levels: 2,
            };
            let g = |x: f64| Ok(Complex64::new(0.0, 2.0 * x).exp());
            let e = spec.second(g, 0.3, g(0.3).unwrap()).unwrap();
            let exact = -4.0 * g(0.3).unwrap();
            assert!((e.value - exact).norm() < 1e-8, "order {order}: {e:?}");
            assert!((e.value - exact).norm() <= e.error);
        }
    }

    #[test]
    fn polynomial_exact_to_stencil_order() {
        let spec = StencilSpec {
            order: 4,
            h: 0.1,
            richardson_levels: 0,
        };
        let g = |x: f64| Ok(c(x.powi(5) - 3.0 * x * x));
        let e = spec.second(g, 1.0, g(1.0).unwrap()).unwrap();
        assert!((e.value.re - 14.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = StencilSpec {
            order: 3,
            ..Default::default()
        };
        assert!(bad.first(|x| Ok(c(x)), 0.0).is_err());
        let bad = StencilSpec {
            h: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
