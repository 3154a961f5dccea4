use super::dense::{Matrix, Scalar};
use crate::error::{Error, Result};

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: f64,
}

/// Pivots below `PIVOT_REL * ‖A‖∞` are treated as zero.
pub const PIVOT_REL: f64 = 1e-14;

impl<T: Scalar> LuFactor<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        Self::with_threshold(a, PIVOT_REL * a.norm_inf())
    }

    /// Factorisation with an absolute pivot threshold; pass `0.0` to accept
    /// any non-zero pivot (used for deliberately ill-conditioned matrices).
    pub fn with_threshold(a: &Matrix<T>, threshold: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                actual: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= threshold || best == 0.0 || !best.is_finite() {
                return Err(Error::SingularMatrix { pivot_index: k });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn size(&self) -> usize {
        self.lu.rows()
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let n = self.size();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_mat(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut x = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col = self.solve_vec(&b.column(j));
            x.set_column(j, &col);
        }
        x
    }

    /// Determinant from the diagonal of `U`.
    pub fn det(&self) -> T {
        let mut d = T::from_f64(self.sign);
        for i in 0..self.size() {
            d *= self.lu[(i, i)];
        }
        d
    }
}

/// Solves `A X = B`.
pub fn lu_solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: b.rows(),
        });
    }
    Ok(LuFactor::new(a)?.solve_mat(b))
}

/// Solves `A X = B` followed by `steps` rounds of iterative refinement.
pub fn lu_solve_refined<T: Scalar>(lu: &LuFactor<T>, a: &Matrix<T>, b: &Matrix<T>, steps: usize) -> Matrix<T> {
    let mut x = lu.solve_mat(b);
    for _ in 0..steps {
        let r = b.sub(&a.matmul(&x));
        x = x.add(&lu.solve_mat(&r));
    }
    x
}
