use num_complex::Complex64;

use super::dense::{norm2, ComplexMatrix, Matrix, Scalar};
use super::svd::cond2;
use crate::error::{Error, Result};

const DEFLATION_TOL: f64 = 1e-14;
const SWEEPS_PER_ROW: usize = 40;

/// Eigenvalues with optional unit eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub values: Vec<Complex64>,
    /// Columns are unit 2-norm eigenvectors.
    pub vectors: Option<ComplexMatrix>,
    /// 2-norm condition number of the eigenvector matrix when computed.
    pub cond2_e: Option<f64>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Unitary similarity to upper Hessenberg form, `M = U H Uᴴ`.
pub fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.rows();
    let mut h = m.clone();
    let mut u = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = norm2(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = norm2(&v);
        if vnorm == 0.0 {
            continue;
        }
        for e in v.iter_mut() {
            *e /= vnorm;
        }
        // H <- (I - 2vvᴴ) H
        for j in 0..n {
            let mut s = czero();
            for (idx, i) in (k + 1..n).enumerate() {
                s += v[idx].conj() * h[(i, j)];
            }
            s *= 2.0;
            for (idx, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= v[idx] * s;
            }
        }
        // H <- H (I - 2vvᴴ), U <- U (I - 2vvᴴ)
        for mat in [&mut h, &mut u] {
            for i in 0..n {
                let mut s = czero();
                for (idx, j) in (k + 1..n).enumerate() {
                    s += mat[(i, j)] * v[idx];
                }
                s *= 2.0;
                for (idx, j) in (k + 1..n).enumerate() {
                    mat[(i, j)] -= s * v[idx].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
    (u, h)
}

/// Rotation `[[c, s], [-s̄, c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, czero());
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let nrm = ax.hypot(ay);
    let phase = x / ax;
    (ax / nrm, phase * y.conj() / nrm)
}

/// Eigenvalue of the 2x2 block closer to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Reduces an upper Hessenberg matrix to upper triangular form in place by
/// single-shift QR sweeps, accumulating the rotations into `z`.
fn hessenberg_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.rows();
    if n <= 1 {
        return Ok(());
    }
    let max_sweeps = SWEEPS_PER_ROW * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        // Locate the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= DEFLATION_TOL * scale || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_sweeps {
            return Err(Error::NonConvergence {
                what: "complex Hessenberg QR",
                iterations: total,
                best_residual: h[(hi, hi - 1)].norm(),
            });
        }
        let shift = if since_deflation % 11 == 10 {
            // Exceptional shift breaks symmetric stagnation cycles.
            let t = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * t, 0.4375 * t)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let first = if k > lo { k - 1 } else { lo };
            for j in first..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = czero();
            }
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -a * s + b * c;
            }
            for i in 0..n {
                let a = z[(i, k)];
                let b = z[(i, k + 1)];
                z[(i, k)] = a * c + b * s.conj();
                z[(i, k + 1)] = -a * s + b * c;
            }
        }
    }
    Ok(())
}

/// Complex Schur form `M = U T Uᴴ` with `T` upper triangular.
pub fn schur_complex<T: Scalar>(m: &Matrix<T>) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            actual: m.cols(),
        });
    }
    let mc = m.to_complex();
    if !mc.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let (mut u, mut t) = hessenberg(&mc);
    hessenberg_qr(&mut t, &mut u)?;
    let n = t.rows();
    for i in 0..n {
        for j in 0..i {
            t[(i, j)] = czero();
        }
    }
    Ok((u, t))
}

/// Eigenvectors of an upper triangular matrix by back substitution.
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let small = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = czero();
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    y
}

/// Dense eigen-decomposition via Hessenberg reduction and shifted QR.
///
/// Eigenvectors come from back substitution on the Schur factor followed by
/// the unitary back-transformation.
pub fn eigen<T: Scalar>(m: &Matrix<T>, want_vectors: bool) -> Result<EigenDecomp> {
    let (u, t) = schur_complex(m)?;
    let n = t.rows();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    if !want_vectors {
        return Ok(EigenDecomp {
            values,
            vectors: None,
            cond2_e: None,
        });
    }
    let mut vecs = u.matmul(&triangular_eigenvectors(&t));
    for j in 0..n {
        let col = vecs.column(j);
        let nrm = norm2(&col);
        let scaled: Vec<Complex64> = col.iter().map(|&x| x / nrm).collect();
        vecs.set_column(j, &scaled);
    }
    let cond = cond2(&vecs).unwrap_or(f64::INFINITY);
    Ok(EigenDecomp {
        values,
        vectors: Some(vecs),
        cond2_e: Some(cond),
    })
}

/// Eigenvalues only.
pub fn eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<Complex64>> {
    Ok(eigen(m, false)?.values)
}
