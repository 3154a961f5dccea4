//! Closed-form mass matrices `M_jk = (φ_k, ψ_j)` of the dual bases.

use serde::{Deserialize, Serialize};

use crate::banded::{BandedMatrix, TriDiagonalMatrix};
use crate::field::Field;

fn r<T: Field>(num: i64, den: i64) -> T {
    T::from_ratio(num, den)
}

/// First-order mass matrix (tridiagonal).
pub fn mass_matrix_m1<T: Field>(n: usize) -> TriDiagonalMatrix<T> {
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for j in 0..n as i64 {
        let ju = j as usize;
        if j >= 1 {
            m.set(ju, ju - 1, r(j, (j + 1) * (2 * j + 1)));
        }
        m.set(ju, ju, r::<T>(1, 2 * j + 1) - r(1, 2 * j + 3));
        if ju + 1 < n {
            m.set(ju, ju + 1, r(-(j + 2), (j + 1) * (2 * j + 3)));
        }
    }
    m
}

/// Mass matrix of the collocation reformulation: trial `(P_{k+1} - P_{k-1})/√2`
/// against test `P_j/√2`.
pub fn mass_matrix_legendre_test<T: Field>(n: usize) -> TriDiagonalMatrix<T> {
    let mut m = BandedMatrix::zeros(n, 1, 1);
    if n == 0 {
        return m;
    }
    m.set(0, 0, T::one());
    for j in 0..n as i64 {
        let ju = j as usize;
        if ju + 1 < n {
            m.set(ju, ju + 1, r(-1, 2 * j + 1));
        }
        if j >= 1 {
            m.set(ju, ju - 1, r(1, 2 * j + 1));
        }
    }
    m
}

/// Inner products used for the last diagonal entry of the second-order mass
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecondOrderVariant {
    /// Gauss-Lobatto quadrature on `N + 2` points.
    Pseudospectral,
    /// Exact integration.
    Spectral,
}

/// `c_k d_j` of the second-order bases: `(k+2)/(2 (j+1)(2j+3))`.
fn cd2<T: Field>(k: i64, j: i64) -> T {
    r(k + 2, 2 * (j + 1) * (2 * j + 3))
}

/// Second-order mass matrix (pentadiagonal).
pub fn mass_matrix_m2<T: Field>(n: usize, variant: SecondOrderVariant) -> BandedMatrix<T> {
    let mut m = BandedMatrix::zeros(n, 2, 2);
    let nn = n as i64;
    for j in 0..nn {
        let ju = j as usize;
        if j >= 2 {
            m.set(ju, ju - 2, r::<T>(2 * (j - 1), j * (2 * j + 1)) * cd2(j - 2, j));
        }
        if j >= 1 {
            m.set(ju, ju - 1, r::<T>(4, (j + 1) * (j + 2)) * cd2(j - 1, j));
        }
        let diag = if j == nn - 1 && variant == SecondOrderVariant::Pseudospectral {
            r(
                -nn * nn * nn - 2 * nn * nn + 4 * nn + 2,
                nn * (nn + 1) * (nn + 1) * (2 * nn - 1) * (2 * nn + 1),
            )
        } else {
            // (γ_j - a_j² γ_{j+1} + b_j² γ_{j+2}) c_j d_j, exact integration.
            let g = r::<T>(2, 2 * j + 1) - r(2 * (2 * j + 3), (j + 2) * (j + 2))
                + r::<T>((j + 1) * (j + 1), (j + 2) * (j + 2)) * r(2, 2 * j + 5);
            g * cd2(j, j)
        };
        m.set(ju, ju, diag);
        if j + 1 < nn {
            m.set(ju, ju + 1, r::<T>(-4, (j + 2) * (j + 3)) * cd2(j + 1, j));
        }
        if j + 2 < nn {
            m.set(ju, ju + 2, r::<T>(2 * (j + 1), (j + 2) * (2 * j + 5)) * cd2(j + 2, j));
        }
    }
    m
}

/// Third-order basis constants `(a_k, b_k, c_k, d_k, e_k)` in the field.
fn third<T: Field>(k: i64) -> (T, T, T, T, T) {
    (
        r(3 * (2 * k + 3), 2 * k + 5),
        r(3 * (k + 1), k + 3),
        r((k + 1) * (2 * k + 3), (k + 3) * (2 * k + 5)),
        r((k + 2) * (k + 3), 2 * (2 * k + 3)),
        r(1, (k + 1) * (k + 2) * (2 * k + 3)),
    )
}

fn gamma<T: Field>(j: i64) -> T {
    r(2, 2 * j + 1)
}

/// Third-order mass matrix (seven-diagonal).
pub fn mass_matrix_m3<T: Field>(n: usize) -> BandedMatrix<T> {
    let mut m = BandedMatrix::zeros(n, 3, 3);
    let nn = n as i64;
    for j in 0..nn {
        let ju = j as usize;
        let (aj, bj, cj, _, ej) = third::<T>(j);
        let g0 = gamma::<T>(j);
        let g1 = gamma::<T>(j + 1);
        let g2 = gamma::<T>(j + 2);
        let g3 = gamma::<T>(j + 3);
        for k in (j - 3).max(0)..(j + 4).min(nn) {
            let (ak, bk, ck, dk, _) = third::<T>(k);
            let inner = match k - j {
                -3 => ck * g0.clone(),
                -2 => bk * g0.clone() - ck * aj.clone() * g1.clone(),
                -1 => ak * g0.clone() - bk * aj.clone() * g1.clone() + ck * bj.clone() * g2.clone(),
                0 => {
                    g0.clone() - aj.clone() * aj.clone() * g1.clone() + bj.clone() * bj.clone() * g2.clone()
                        - cj.clone() * cj.clone() * g3.clone()
                }
                1 => -(aj.clone() * g1.clone()) + ak * bj.clone() * g2.clone() - bk * cj.clone() * g3.clone(),
                2 => bj.clone() * g2.clone() - ak * cj.clone() * g3.clone(),
                3 => -(cj.clone() * g3.clone()),
                _ => unreachable!(),
            };
            m.set(ju, k as usize, ej.clone() * dk * inner);
        }
    }
    m
}

/// Jacobi matrix of `B_n^{(5)}` written out explicitly.
pub fn breve_matrix<T: Field>(n: usize) -> TriDiagonalMatrix<T> {
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for j in 0..n as i64 {
        let ju = j as usize;
        if j >= 1 {
            m.set(ju, ju - 1, r(j, (j + 2) * (2 * j + 3)));
        }
        m.set(ju, ju, r(6, (2 * j + 3) * (2 * j + 5)));
        if ju + 1 < n {
            m.set(ju, ju + 1, r(-(j + 4), (j + 2) * (2 * j + 5)));
        }
    }
    m
}

/// `I - σ M` as a dense `f64` matrix.
pub(crate) fn identity_minus<T: Field>(m: &BandedMatrix<T>, sigma: f64) -> crate::linalg::Matrix<f64> {
    let mut d = m.to_dense().scale(-sigma);
    for k in 0..m.size() {
        d[(k, k)] += 1.0;
    }
    d
}
