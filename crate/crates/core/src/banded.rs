//! Square banded matrices over a [`Field`].

use crate::field::Field;
use crate::linalg::Matrix;

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Entry `(i, j)` with `i - lower <= j <= i + upper` is stored at
/// `data[i * width + (j + lower - i)]` where `width = lower + upper + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

/// Banded matrix with one sub- and one super-diagonal.
pub type TriDiagonalMatrix<T = f64> = BandedMatrix<T>;

impl<T: Field> BandedMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = lower + upper + 1;
        Self {
            n,
            lower,
            upper,
            data: vec![T::zero(); n * width],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * (self.lower + self.upper + 1) + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.index(i, j)].clone()
        } else {
            T::zero()
        }
    }

    /// Sets an entry; panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band ({}, {})",
            self.lower,
            self.upper
        );
        let idx = self.index(i, j);
        self.data[idx] = value;
    }

    /// Column range `[lo, hi)` of row `i` inside the band.
    fn row_range(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.lower), (i + self.upper + 1).min(self.n))
    }

    /// Product of two banded matrices; bandwidths add.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "banded product needs equal sizes");
        let n = self.n;
        let mut out = Self::zeros(
            n,
            (self.lower + other.lower).min(n.saturating_sub(1)),
            (self.upper + other.upper).min(n.saturating_sub(1)),
        );
        for i in 0..n {
            let (lo, hi) = self.row_range(i);
            for k in lo..hi {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let (lo2, hi2) = other.row_range(k);
                for j in lo2..hi2 {
                    let idx = out.index(i, j);
                    let prod = a.clone() * other.get(k, j);
                    out.data[idx] = out.data[idx].clone() + prod;
                }
            }
        }
        out
    }

    /// `self^p` for `p >= 1`.
    pub fn pow(&self, p: u32) -> Self {
        assert!(p >= 1, "power must be positive");
        let mut out = self.clone();
        for _ in 1..p {
            out = out.matmul(self);
        }
        out
    }

    /// Entry-wise difference; the result carries the wider band.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zeros(self.n, self.lower.max(other.lower), self.upper.max(other.upper));
        for i in 0..self.n {
            let (lo, hi) = out.row_range(i);
            for j in lo..hi {
                out.set(i, j, self.get(i, j) - other.get(i, j));
            }
        }
        out
    }

    /// Index pairs of the non-zero entries, row-major.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                if !self.get(i, j).is_zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn map_f64(&self) -> BandedMatrix<f64> {
        BandedMatrix {
            n: self.n,
            lower: self.lower,
            upper: self.upper,
            data: self.data.iter().map(Field::to_f64).collect(),
        }
    }

    pub fn to_dense(&self) -> Matrix<f64> {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                m[(i, j)] = self.get(i, j).to_f64();
            }
        }
        m
    }

    /// Max-row-sum norm evaluated in `f64`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (lo, hi) = self.row_range(i);
                (lo..hi).map(|j| self.get(i, j).to_f64().abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

impl BandedMatrix<f64> {
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (lo, hi) = self.row_range(i);
                (lo..hi).map(|j| self.data[self.index(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// `y = self^T x`.
    pub fn mul_vec_transposed(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (lo, hi) = self.row_range(i);
            for j in lo..hi {
                y[j] += self.data[self.index(i, j)] * x[i];
            }
        }
        y
    }

    /// Dense sub-, main and super-diagonal vectors of a tridiagonal matrix.
    pub fn tridiagonal_bands(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let sub = (1..n).map(|i| self.get(i, i - 1)).collect();
        let diag = (0..n).map(|i| self.get(i, i)).collect();
        let sup = (0..n.saturating_sub(1)).map(|i| self.get(i, i + 1)).collect();
        (sub, diag, sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rational;

    #[test]
    fn product_of_bidiagonals_is_tridiagonal() {
        let mut a = BandedMatrix::<Rational>::zeros(3, 1, 0);
        let mut b = BandedMatrix::<Rational>::zeros(3, 0, 1);
        for i in 0..3 {
            a.set(i, i, Rational::from_int(2));
            b.set(i, i, Rational::from_int(1));
            if i > 0 {
                a.set(i, i - 1, Rational::from_ratio(1, 2));
            }
            if i + 1 < 3 {
                b.set(i, i + 1, Rational::from_int(3));
            }
        }
        let c = a.matmul(&b);
        assert_eq!(c.lower(), 1);
        assert_eq!(c.upper(), 1);
        assert_eq!(c.get(1, 1), Rational::from_ratio(7, 2));
        assert_eq!(c.get(0, 1), Rational::from_int(6));
        assert_eq!(c.get(2, 1), Rational::from_ratio(1, 2));
        let dense = a.to_dense().matmul(&b.to_dense());
        assert_eq!(dense, c.to_dense());
    }

    #[test]
    fn support_and_difference() {
        let eye = BandedMatrix::<Rational>::identity(4);
        let mut m = eye.clone();
        let mut wide = BandedMatrix::<Rational>::zeros(4, 1, 1);
        for i in 0..4 {
            wide.set(i, i, Rational::one());
        }
        wide.set(2, 3, Rational::from_int(5));
        m = m.sub(&wide);
        assert_eq!(m.support(), vec![(2, 3)]);
    }

    #[test]
    fn transposed_product() {
        let mut m = BandedMatrix::<f64>::zeros(3, 1, 1);
        m.set(0, 0, 1.0);
        m.set(0, 1, 2.0);
        m.set(1, 0, 3.0);
        m.set(2, 1, 4.0);
        m.set(2, 2, 5.0);
        let x = [1.0, -1.0, 2.0];
        assert_eq!(m.mul_vec(&x), vec![-1.0, 3.0, 6.0]);
        assert_eq!(m.mul_vec_transposed(&x), vec![-2.0, 10.0, 10.0]);
    }
}
