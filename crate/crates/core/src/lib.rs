//! Numerical models built from the cubic ("canonoid") Hamiltonians of the
//! harmonic oscillator.
//!
//! The crate is organized around the quantum and classical sides of the same
//! family of cubic Hamiltonians:
//!
//! - [`fock`]: truncated Fock-space operator engine — ladder operators, the
//!   cubic Hamiltonians, the quadratic W-algebra and its Casimir, Heisenberg
//!   constants of motion, subharmonic evolution and quadrature variances.
//! - [`jacobi`]: the number-basis eigenvalue problem as a Jacobi operator with
//!   off-diagonals `(n+1)^{3/2}` — three-term recursion, finite sections,
//!   limit-circle diagnostics, and the discrete spectra of the self-adjoint
//!   extensions.
//! - [`special`]: self-contained special-function kernel (Hermite polynomials,
//!   double-factorial ratios, Kummer M and U, Gauss rules, adaptive
//!   quadrature).
//! - [`repr`]: eigenfunction assembly and verification in the coordinate and
//!   Fock–Bargmann representations.
//! - [`classical`]: fouled Lagrangians/Hamiltonians, invariants, Poisson
//!   brackets and the Ermakov system.
//!
//! All operations are pure functions of their inputs; every type is immutable
//! after construction and safe to share across threads.

pub mod classical;
pub mod error;
pub mod fock;
pub mod jacobi;
pub mod repr;
pub mod special;

pub use error::{Error, Result};
