//! Wavefunctions: Φ₀, Ψ₀^{N,Ñ}, the kernel function F, plane-wave dressing
//! and the Laurent-coefficient eigenfunctions.

mod coefficients;
mod model;
mod product;

pub use coefficients::{
    annulus_integrand, annulus_integrand_on_circle, pn_coefficients, pn_coefficients_at,
    reconstruct_annulus_product, unit_points, LaurentCoefficients, LaurentEigenstate, QuadratureSpec,
};
pub use model::{DeformedModel, Group, MassModel, Side};
pub use product::{
    build_kernel_f, build_phi0, build_psi0, dress_plane_wave, periodic_distance, Configuration,
    LogDerivatives, PairFactor, ProductState, Role, Wavefunction,
};
