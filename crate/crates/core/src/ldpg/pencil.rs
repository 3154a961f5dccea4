//! Pencil form `(Q P, Q M P)` of the first-order scheme under a change of
//! trial basis `P` and test basis `Q`.
//!
//! The generalised eigenvalues of `(Ŝ, M̂)`, i.e. `Ŝ v = λ M̂ v`, are the
//! reciprocals of the eigenvalues of `M` for every admissible `(P, Q)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ldpg::mass::mass_matrix_m1;
use crate::linalg::{cond2, eigenvalues, lu_solve, Matrix};
use crate::Complex64;

/// Largest accepted 2-norm condition number of `P` and `Q`.
pub const MAX_BASIS_CONDITION: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Pencil {
    pub s_hat: Matrix<f64>,
    pub m_hat: Matrix<f64>,
}

pub fn change_of_basis_pencil(n: usize, p: &Matrix<f64>, q: &Matrix<f64>) -> Result<Pencil> {
    for m in [p, q] {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.rows().max(m.cols()),
            });
        }
        let c = cond2(m)?;
        if c >= MAX_BASIS_CONDITION {
            return Err(Error::IllConditioned { estimate: c });
        }
    }
    let mass = mass_matrix_m1::<f64>(n).to_dense();
    Ok(Pencil {
        s_hat: q.matmul(p),
        m_hat: q.matmul(&mass).matmul(p),
    })
}

impl Pencil {
    /// Eigenvalues of `M̂⁻¹ Ŝ`.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&lu_solve(&self.m_hat, &self.s_hat)?)
    }
}

/// Orthogonal matrix from Gram-Schmidt on uniform random entries.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Matrix<f64> {
    let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut q: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut v = a.column(j);
        // Two passes keep the columns orthogonal to working precision.
        for _ in 0..2 {
            for u in &q {
                let d: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= d * ui;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|x| x / norm).collect());
    }
    Matrix::from_fn(n, n, |i, j| q[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matched_max_deviation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_change_gives_reciprocals() {
        let n = 5;
        let eye = Matrix::identity(n);
        let pencil = change_of_basis_pencil(n, &eye, &eye).unwrap();
        let mass = eigenvalues(&mass_matrix_m1::<f64>(n).to_dense()).unwrap();
        let recip: Vec<Complex64> = mass.iter().map(|z| 1.0 / z).collect();
        assert!(matched_max_deviation(&pencil.eigenvalues().unwrap(), &recip) < 1e-10);
    }

    #[test]
    fn spectrum_is_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 6;
        let eye = Matrix::identity(n);
        let base = change_of_basis_pencil(n, &eye, &eye).unwrap().eigenvalues().unwrap();
        let p = random_orthogonal(n, &mut rng);
        let q = random_orthogonal(n, &mut rng);
        let ev = change_of_basis_pencil(n, &p, &q).unwrap().eigenvalues().unwrap();
        assert!(matched_max_deviation(&ev, &base) < 1e-9);

        let n = 4;
        let eye = Matrix::identity(n);
        let base = change_of_basis_pencil(n, &eye, &eye).unwrap().eigenvalues().unwrap();
        let d = Matrix::from_fn(n, n, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let ev = change_of_basis_pencil(n, &d, &eye).unwrap().eigenvalues().unwrap();
        assert!(matched_max_deviation(&ev, &base) < 1e-9);
    }

    #[test]
    fn near_singular_basis_is_rejected() {
        let n = 3;
        let mut p = Matrix::identity(n);
        p[(2, 2)] = 1e-10;
        assert!(matches!(
            change_of_basis_pencil(n, &p, &Matrix::identity(n)),
            Err(Error::IllConditioned { .. })
        ));
    }
}
