//! Dual-Petrov-Galerkin time discretisation on `[-1, 1]`: compact bases,
//! closed-form mass matrices, collocation, model IVP solvers and eigenvalue
//! studies.

pub mod basis;
pub mod collocation;
pub mod ivp;
pub mod mass;
pub mod pencil;
pub mod perturbation;

pub use basis::{
    compact_basis, endpoint_combo, kdv_conditions, order_conditions, CompactBasis, EndpointCondition, Side,
};
pub use collocation::{collocation_basis_values, collocation_d};
pub use ivp::{exact_solution, solve_ivp, IvpSolution, IvpStrategy};
pub use mass::{
    breve_matrix, mass_matrix_legendre_test, mass_matrix_m1, mass_matrix_m2, mass_matrix_m3, SecondOrderVariant,
};
pub use pencil::{change_of_basis_pencil, random_orthogonal, Pencil};
