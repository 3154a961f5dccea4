//! Collocation at Legendre-Gauss points for `u' = σu`.

use crate::linalg::Matrix;
use crate::polybasis::{gauss_rule, legendre_values, legendre_with_derivative};

/// Collocation matrix `D` acting on nodal values `u(t_i)` of the unknown
/// written as `u = (1 + t) h(t)` with `h` interpolated on the Gauss nodes.
///
/// `D_ij = δ_ij/(1+t_j) + (1+t_i)/(1+t_j) l_j'(t_i)`, with Lagrange derivatives
/// from barycentric weights `w_j = 1/P_N'(t_j)`.
pub fn collocation_d(n: usize) -> Matrix<f64> {
    let nodes = gauss_rule(n).nodes;
    let w: Vec<f64> = nodes.iter().map(|&t| 1.0 / legendre_with_derivative(n, t).1).collect();
    let mut lp = Matrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                lp[(i, j)] = v;
                diag -= v;
            }
        }
        lp[(i, i)] = diag;
    }
    Matrix::from_fn(n, n, |i, j| {
        let own = if i == j { 1.0 / (1.0 + nodes[j]) } else { 0.0 };
        own + (1.0 + nodes[i]) / (1.0 + nodes[j]) * lp[(i, j)]
    })
}

/// Values `Φ_ik = φ_k(t_i)` of the trial functions `φ_0 = (1+t)/√2`,
/// `φ_k = (P_{k+1} - P_{k-1})/√2` on the Gauss nodes.
pub fn collocation_basis_values(n: usize) -> Matrix<f64> {
    let nodes = gauss_rule(n).nodes;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut phi = Matrix::zeros(n, n);
    for (i, &t) in nodes.iter().enumerate() {
        let p = legendre_values(n, t);
        phi[(i, 0)] = (1.0 + t) * s;
        for k in 1..n {
            phi[(i, k)] = (p[k + 1] - p[k - 1]) * s;
        }
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpg::mass::mass_matrix_legendre_test;
    use crate::linalg::{eigenvalues, lu_solve, matched_max_deviation};
    use crate::Complex64;

    #[test]
    fn small_cases() {
        assert!((collocation_d(1)[(0, 0)] - 1.0).abs() < 1e-15);
        let d = collocation_d(2);
        let r3 = 3f64.sqrt();
        let expect = [[1.5, (2.0 * r3 - 3.0) / 2.0], [-(2.0 * r3 + 3.0) / 2.0, 1.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((d[(i, j)] - expect[i][j]).abs() < 1e-14, "({i},{j})");
            }
        }
        let ev = eigenvalues(&d).unwrap();
        let want = [Complex64::new(1.5, r3 / 2.0), Complex64::new(1.5, -r3 / 2.0)];
        assert!(matched_max_deviation(&ev, &want) < 1e-12);
    }

    #[test]
    fn similar_to_inverse_mass_matrix() {
        for n in [3, 8, 20, 40] {
            let phi = collocation_basis_values(n);
            let mbar = mass_matrix_legendre_test::<f64>(n).to_dense();
            // D Φ M̄ = Φ.
            let lhs = collocation_d(n).matmul(&phi).matmul(&mbar);
            let err = lhs.sub(&phi).max_abs() / phi.max_abs();
            assert!(err < 1e-10, "n = {n}: {err}");
            let x = lu_solve(&phi, &lhs).unwrap();
            assert!(x.sub(&Matrix::identity(n)).max_abs() < 1e-8);
        }
    }
}
