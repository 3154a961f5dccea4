//! Legendre dual-Petrov-Galerkin spectral methods in time.
//!
//! The crate covers the full pipeline from polynomial building blocks to
//! space-time PDE solvers:
//!
//! * [`polybasis`]: Legendre evaluation, quadrature, coefficient calculus.
//! * [`gbp`]: generalised Bessel polynomials, their Jacobi matrices and a
//!   Newton solver for their zeros.
//! * [`ldpg`]: dual-Petrov-Galerkin bases, mass matrices, collocation
//!   matrices and scalar IVP solvers.
//! * [`linalg`]: dense LU, complex Schur/QR eigen solver, identity-pencil QZ,
//!   Jacobi SVD condition numbers and block backward substitution.
//! * [`timesolver`]: the all-at-once time discretisation of `u' + Au = f`
//!   solved by diagonalisation or by QZ backward substitution.
//! * [`models`]: a linear wave-type equation and a KdV-type equation.
//!
//! The binary `spectral-time` exposes these as batch subcommands.

pub mod banded;
pub mod cli;
pub mod ddouble;
pub mod error;
pub mod field;
pub mod gbp;
pub mod io;
pub mod ldpg;
pub mod linalg;
pub mod models;
pub mod polybasis;
pub mod timesolver;

pub use error::{Error, Result};
pub use num_complex::Complex64;
