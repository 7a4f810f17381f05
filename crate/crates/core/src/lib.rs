//! Numerical spectral analysis of the linearized non-cutoff Boltzmann operator
//! at Galerkin desk scale.
//!
//! The toolkit assembles the linearized collision operator `L` for hard
//! potentials (γ + 2s ≥ 0) in an orthonormal Hermite velocity basis, splits it
//! as `L = -A + K` with `A` coercive and `K` of rank d+2, and studies the
//! Fourier-mode family `B̂(r) = -2πi r V₁ + L`: eigenvalue branches emanating
//! from the kernel, the dispersion determinant, resolvent bounds, semigroup
//! propagation by matrix exponential and by Bromwich contour, whole-space decay
//! rates, and the small-data Picard iteration for the quadratic problem
//! `f_t = Bf + Γ(f,f)`.
//!
//! Everything is dense `f64`/`Complex64` linear algebra; basis sizes stay in
//! the tens-to-hundreds, so clarity beats sparsity throughout.

pub mod basis;
pub mod collision;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod linalg;
pub mod nonlinear;
pub mod quadrature;
pub mod semigroup;
pub mod stats;
pub mod symbols;

pub use error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type RMatrix = nalgebra::DMatrix<f64>;
/// Dense real vector.
pub type RVector = nalgebra::DVector<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
/// Complex scalar.
pub type C64 = num_complex::Complex64;
