//! Numerical laboratory for elliptic Calogero–Sutherland type operators.
//!
//! The crate evaluates the elliptic functions θ, V, φ, f and the constants
//! c₀, c₁ ([`elliptic`]), builds the product wavefunctions and kernel
//! functions of the models ([`states`]), applies the many-body Hamiltonians
//! to them through two independent backends ([`operators`]) and turns the
//! resulting identities into residual reports ([`verify`]).

pub mod elliptic;
pub mod error;
pub mod fd;
pub mod operators;
pub mod states;
pub mod verify;

pub use elliptic::{EllipticContext, TruncationPolicy, C1};
pub use error::{Error, Result};
pub use num_complex::Complex64;
