//! Dense real/complex kernels: LU, Hessenberg QR eigen solver, complex
//! Schur form, identity-pencil QZ, Jacobi SVD and block backward
//! substitution.

mod dense;
mod eigen;
mod lu;
mod qz;
mod svd;

pub use dense::{norm2, norm_inf_vec, ComplexMatrix, Matrix, Scalar};
pub use eigen::{eigen, eigenvalues, hessenberg, schur_complex, EigenDecomp};
pub use lu::{lu_solve, lu_solve_refined, LuFactor, PIVOT_REL};
pub use qz::{qz_identity, triangular_block_backsub, BlockBacksub, QzForm};
pub use svd::{cond2, cond2_complex, singular_values};

use num_complex::Complex64;

/// Pairs every entry of `a` with a distinct entry of `b` by repeatedly
/// taking the globally closest remaining pair, and returns the largest
/// distance among the pairs. Sets of different sizes give `∞`.
pub fn matched_max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    let mut used_a = vec![false; n];
    let mut used_b = vec![false; n];
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| !used_a[i]) {
            for j in (0..n).filter(|&j| !used_b[j]) {
                let d = (a[i] - b[j]).norm();
                if d < best.2 || best.0 == usize::MAX {
                    best = (i, j, d);
                }
            }
        }
        used_a[best.0] = true;
        used_b[best.1] = true;
        worst = worst.max(best.2);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_ignores_order() {
        let a = [Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)];
        let b = [Complex64::new(1.0, -1.0), Complex64::new(1.0, 1.0 + 1e-3)];
        assert!((matched_max_deviation(&a, &b) - 1e-3).abs() < 1e-12);
        assert!(matched_max_deviation(&a, &b[..1]).is_infinite());
    }
}
