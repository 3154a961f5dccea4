use num_complex::Complex64;

use super::dense::{ComplexMatrix, Matrix, Scalar};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Vec<f64> {
    // Work on columns of Aᵀ-free storage: copy columns into vectors.
    let m = a.rows();
    let n = a.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..m).map(|i| a[(i, j)].to_complex()).collect())
        .collect();
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate a_q by the phase of gamma so the pair is real.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = (xp * s + yq * c) * phase;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number `σ_max / σ_min`.
pub fn cond2<T: Scalar>(a: &Matrix<T>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: a.cols(),
        });
    }
    let sv = singular_values(a);
    let (max, min) = (sv[0], *sv.last().unwrap_or(&0.0));
    if min < 1e-300 {
        return Err(Error::SingularMatrix {
            pivot_index: sv.len().saturating_sub(1),
        });
    }
    Ok(max / min)
}

/// Convenience for complex inputs.
pub fn cond2_complex(a: &ComplexMatrix) -> Result<f64> {
    cond2(a)
}
