use num_complex::Complex64;

use super::dense::{ComplexMatrix, Matrix, Scalar};
use super::eigen::schur_complex;
use super::lu::LuFactor;
use crate::error::{Error, Result};

/// Generalised Schur form of a pencil: `Q B Z = S`, `Q M Z = T`.
#[derive(Debug, Clone)]
pub struct QzForm {
    pub q: ComplexMatrix,
    pub z: ComplexMatrix,
    pub s: ComplexMatrix,
    pub t: ComplexMatrix,
}

/// QZ form of the pencil `(I, M)` from one complex Schur factorisation:
/// `Z = U`, `Q = Uᴴ`, `S = I`, `T = Uᴴ M U`.
pub fn qz_identity<T: Scalar>(m: &Matrix<T>) -> Result<QzForm> {
    let (u, t) = schur_complex(m)?;
    let n = u.rows();
    Ok(QzForm {
        q: u.conj_transpose(),
        z: u,
        s: ComplexMatrix::identity(n),
        t,
    })
}

/// Backward substitution for `S W Cᵀ - T W Aᵀ = G` with `S`, `T` upper
/// triangular (`N_t × N_t`) and `C`, `A` spatial operators (`N_x × N_x`).
///
/// Row `j` of `W` solves `(S_jj C - T_jj A) w_jᵀ = g_jᵀ - Σ_{k>j} (S_jk C -
/// T_jk A) w_kᵀ`. The `N_t` shifted matrices are factorised once, so the
/// solver can be reused for many right-hand sides.
#[derive(Debug, Clone)]
pub struct BlockBacksub {
    s: ComplexMatrix,
    t: ComplexMatrix,
    c: Option<ComplexMatrix>,
    a: ComplexMatrix,
    factors: Vec<LuFactor<Complex64>>,
}

impl BlockBacksub {
    /// `c = None` stands for the identity.
    pub fn new(s: &ComplexMatrix, t: &ComplexMatrix, c: Option<&ComplexMatrix>, a: &ComplexMatrix) -> Result<Self> {
        let nt = s.rows();
        let nx = a.rows();
        if t.rows() != nt || !a.is_square() || c.is_some_and(|c| c.rows() != nx) {
            return Err(Error::DimensionMismatch {
                expected: nt,
                actual: t.rows(),
            });
        }
        let factors = (0..nt)
            .map(|j| {
                let shifted = shifted_operator(s[(j, j)], t[(j, j)], c, a);
                LuFactor::new(&shifted).map_err(|_| Error::Resonance { index: j })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            s: s.clone(),
            t: t.clone(),
            c: c.cloned(),
            a: a.clone(),
            factors,
        })
    }

    pub fn time_size(&self) -> usize {
        self.s.rows()
    }

    pub fn space_size(&self) -> usize {
        self.a.rows()
    }

    /// Solves for `W` given `G` (`N_t × N_x`).
    pub fn solve(&self, g: &ComplexMatrix) -> ComplexMatrix {
        let nt = self.time_size();
        let nx = self.space_size();
        assert_eq!((g.rows(), g.cols()), (nt, nx));
        let mut w = ComplexMatrix::zeros(nt, nx);
        // C w_k and A w_k for already computed rows.
        let mut cw: Vec<Vec<Complex64>> = vec![Vec::new(); nt];
        let mut aw: Vec<Vec<Complex64>> = vec![Vec::new(); nt];
        for j in (0..nt).rev() {
            let mut rhs: Vec<Complex64> = g.row(j).to_vec();
            for k in j + 1..nt {
                let sjk = self.s[(j, k)];
                let tjk = self.t[(j, k)];
                if sjk != Complex64::new(0.0, 0.0) {
                    for (r, &x) in rhs.iter_mut().zip(&cw[k]) {
                        *r -= sjk * x;
                    }
                }
                if tjk != Complex64::new(0.0, 0.0) {
                    for (r, &x) in rhs.iter_mut().zip(&aw[k]) {
                        *r += tjk * x;
                    }
                }
            }
            let wj = self.factors[j].solve_vec(&rhs);
            cw[j] = match &self.c {
                Some(c) => c.mul_vec(&wj),
                None => wj.clone(),
            };
            aw[j] = self.a.mul_vec(&wj);
            w.row_mut(j).copy_from_slice(&wj);
        }
        w
    }
}

fn shifted_operator(sjj: Complex64, tjj: Complex64, c: Option<&ComplexMatrix>, a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut out = a.scale(-tjj);
    match c {
        Some(c) => {
            out = out.add(&c.scale(sjj));
        }
        None => {
            for i in 0..n {
                out[(i, i)] += sjj;
            }
        }
    }
    out
}

/// Solves `S W - T W Aᵀ = G` by backward substitution over the rows of `W`.
pub fn triangular_block_backsub(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    a: &ComplexMatrix,
    g: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    Ok(BlockBacksub::new(s, t, None, a)?.solve(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_case() {
        let s = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0)]]);
        let t = ComplexMatrix::from_rows(&[vec![c(0.5, 0.0)]]);
        let a = ComplexMatrix::from_rows(&[vec![c(3.0, 0.0)]]);
        let g = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)]]);
        let w = triangular_block_backsub(&s, &t, &a, &g).unwrap();
        assert!((w[(0, 0)] - c(1.0 / (2.0 - 1.5), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_pencil_of_identity() {
        let qz = qz_identity(&Matrix::<f64>::identity(3)).unwrap();
        assert!(qz.t.sub(&ComplexMatrix::identity(3)).max_abs() < 1e-15);
        assert_eq!(qz.s, ComplexMatrix::identity(3));
    }

    #[test]
    fn resonance_is_reported() {
        let s = ComplexMatrix::identity(2);
        let t = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.5, 0.0)]]);
        let a = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0)]]);
        let err = BlockBacksub::new(&s, &t, None, &a).unwrap_err();
        assert_eq!(err, Error::Resonance { index: 1 });
    }
}
