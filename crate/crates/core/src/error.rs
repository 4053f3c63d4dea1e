use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A q-series needed more terms than the truncation policy allows.
    #[error("series truncation failed: {terms} terms did not reach tail bound {target_eps:e}")]
    Truncation { terms: usize, target_eps: f64 },

    /// Argument within the singularity guard of a lattice point 2πk.
    #[error("argument {r} is within {guard:e} of a pole")]
    Singularity { r: f64, guard: f64 },

    /// Input outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter constraint of an identity or model violated.
    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("cannot place {count} coordinates with separation {min_sep} on the circle")]
    InfeasiblePacking { count: usize, min_sep: f64 },

    /// A Laurent coefficient vanishes at the sampled point.
    #[error("degenerate coefficient: {0}")]
    Degenerate(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("the analytic backend requires a product state")]
    NotProductState,
}

impl Error {
    /// True for errors caused by the requested parameters rather than by a
    /// numerical evaluation.
    pub fn is_constraint(&self) -> bool {
        matches!(self, Error::Constraint(_) | Error::InfeasiblePacking { .. })
    }
}
