//! Eigenvalue studies of the non-normal mass matrices.
//!
//! The eigenvalue condition numbers of these matrices grow exponentially in
//! `N`: double precision loses the spectrum near `N ≈ 40` and double-double
//! near `N ≈ 50`. The studies below therefore work from the exact
//! characteristic polynomial and refine its roots with the Aberth-Ehrlich
//! iteration in big-integer fixed point, where evaluation is exact and the
//! only rounding is the `2^-FIXED_BITS` grid of the iterates.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::banded::BandedMatrix;
use crate::ddouble::{DdComplex, DoubleDouble};
use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::gbp::{gbp_zeros, jacobi_matrix_field};
use crate::ldpg::mass::{breve_matrix, mass_matrix_legendre_test, mass_matrix_m2, mass_matrix_m3, SecondOrderVariant};
use crate::linalg::{eigenvalues, matched_max_deviation};
use crate::Complex64;

const FIXED_BITS: usize = 200;
const ABERTH_MAX_ITER: usize = 100;
const ABERTH_TOL: f64 = 1e-40;

/// `det(A)` by Gaussian elimination inside the band, exact.
fn band_determinant(mut a: Vec<Vec<Rational>>, lower: usize, upper: usize) -> Rational {
    let n = a.len();
    let mut det = <Rational as Field>::one();
    for k in 0..n {
        let last_row = (k + lower).min(n - 1);
        let last_col = (k + lower + upper).min(n - 1);
        let Some(p) = (k..=last_row).find(|&r| !Field::is_zero(&a[r][k])) else {
            return <Rational as Field>::zero();
        };
        if p != k {
            a.swap(k, p);
            det = -det;
        }
        let piv = a[k][k].clone();
        det *= &piv;
        for i in k + 1..=last_row {
            if Field::is_zero(&a[i][k]) {
                continue;
            }
            let l = &a[i][k] / &piv;
            for j in k..=last_col {
                let sub = &l * &a[k][j];
                a[i][j] -= sub;
            }
        }
    }
    det
}

/// Coefficients (constant term first) of `det(μI - M)`, exact.
///
/// Obtained by interpolating exact determinants at `μ = 0, 1, ..., N`.
pub fn characteristic_polynomial(m: &BandedMatrix<Rational>) -> Vec<Rational> {
    let n = m.size();
    let values: Vec<Rational> = (0..=n)
        .map(|x| {
            let a = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let v = -m.get(i, j);
                            if i == j {
                                v + Rational::from_int(x as i64)
                            } else {
                                v
                            }
                        })
                        .collect()
                })
                .collect();
            band_determinant(a, m.lower(), m.upper())
        })
        .collect();
    // Newton divided differences on the integer nodes.
    let mut dd = values;
    for level in 1..=n {
        for i in (level..=n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / Rational::from_int(level as i64);
        }
    }
    // Expand Σ dd[k] Π_{i<k} (μ - i) into monomials, Horner style.
    let mut coeffs = vec![<Rational as Field>::zero(); n + 1];
    coeffs[0] = dd[n].clone();
    let mut degree = 0;
    for k in (0..n).rev() {
        // coeffs ← coeffs · (μ - k) + dd[k]
        let shift = Rational::from_int(k as i64);
        for i in (0..=degree + 1).rev() {
            let below = if i > 0 {
                coeffs[i - 1].clone()
            } else {
                <Rational as Field>::zero()
            };
            coeffs[i] = below - &shift * &coeffs[i];
        }
        coeffs[0] += &dd[k];
        degree += 1;
    }
    coeffs
}

/// Complex fixed-point number `(re + i im) / 2^FIXED_BITS`.
#[derive(Clone, Debug)]
struct Fixed {
    re: BigInt,
    im: BigInt,
}

impl Fixed {
    fn from_c64(z: Complex64) -> Self {
        let scale = |x: f64| {
            let r = Rational::from_float(x).unwrap_or_else(<Rational as Field>::zero);
            (r * Rational::from_integer(BigInt::one() << FIXED_BITS)).to_integer()
        };
        Self {
            re: scale(z.re),
            im: scale(z.im),
        }
    }

    fn to_c64(&self) -> Complex64 {
        let s = (-(FIXED_BITS as f64)).exp2();
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN) * s,
            self.im.to_f64().unwrap_or(f64::NAN) * s,
        )
    }

    fn to_dd(&self) -> DdComplex {
        let den = BigInt::one() << FIXED_BITS;
        DdComplex::new(
            DoubleDouble::from_rational(&Rational::new(self.re.clone(), den.clone())),
            DoubleDouble::from_rational(&Rational::new(self.im.clone(), den)),
        )
    }
}

fn mul_big_f64(x: &BigInt, f: f64) -> BigInt {
    let r = Rational::from_float(f).unwrap_or_else(<Rational as Field>::zero);
    (x * r.numer()) / r.denom()
}

/// `2^{FIXED_BITS·deg} p(z)` for integer coefficients, exact.
fn horner(c: &[BigInt], z: &Fixed) -> (BigInt, BigInt) {
    let deg = c.len() - 1;
    let (mut re, mut im) = (c[deg].clone(), BigInt::zero());
    for k in (0..deg).rev() {
        let nre = &re * &z.re - &im * &z.im;
        let nim = &re * &z.im + &im * &z.re;
        re = nre + (&c[k] << (FIXED_BITS * (deg - k)));
        im = nim;
    }
    (re, im)
}

/// Roots of an exact polynomial refined from `starts`; order preserved.
fn aberth_fixed(poly: &[Rational], starts: &[Complex64]) -> Result<Vec<Fixed>> {
    let deg = poly.len() - 1;
    if starts.len() != deg {
        return Err(Error::DimensionMismatch {
            expected: deg,
            actual: starts.len(),
        });
    }
    let lcm = poly
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let c: Vec<BigInt> = poly.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    let dc: Vec<BigInt> = c.iter().enumerate().skip(1).map(|(i, v)| v * BigInt::from(i)).collect();
    let mut z: Vec<Fixed> = starts.iter().map(|&s| Fixed::from_c64(s)).collect();
    let mut zf: Vec<Complex64> = z.iter().map(Fixed::to_c64).collect();
    let mut converged = vec![false; deg];
    let mut worst = f64::INFINITY;
    for _ in 0..ABERTH_MAX_ITER {
        worst = 0.0;
        for i in 0..deg {
            if converged[i] {
                continue;
            }
            let (pr, pi) = horner(&c, &z[i]);
            let (dr, di) = if dc.is_empty() {
                (BigInt::zero(), BigInt::zero())
            } else {
                horner(&dc, &z[i])
            };
            let den = &dr * &dr + &di * &di;
            if den.is_zero() || (pr.is_zero() && pi.is_zero()) {
                converged[i] = true;
                continue;
            }
            // 2^B p/p' = P / D, with P = 2^{B deg} p and D = 2^{B(deg-1)} p'.
            let q = Fixed {
                re: (&pr * &dr + &pi * &di) / &den,
                im: (&pi * &dr - &pr * &di) / &den,
            };
            let ratio = q.to_c64();
            let repulsion: Complex64 = zf
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &zj)| 1.0 / (zf[i] - zj))
                .sum();
            let f = 1.0 / (1.0 - ratio * repulsion);
            let step = Fixed {
                re: mul_big_f64(&q.re, f.re) - mul_big_f64(&q.im, f.im),
                im: mul_big_f64(&q.re, f.im) + mul_big_f64(&q.im, f.re),
            };
            z[i].re -= &step.re;
            z[i].im -= &step.im;
            zf[i] = z[i].to_c64();
            let step_abs = step.re.abs().max(step.im.abs());
            let z_abs = z[i].re.abs().max(z[i].im.abs());
            let rel = if z_abs.is_zero() {
                step.to_c64().norm()
            } else {
                Field::to_f64(&Rational::new(step_abs, z_abs))
            };
            worst = worst.max(rel);
            if rel < ABERTH_TOL {
                converged[i] = true;
            }
        }
        if converged.iter().all(|&c| c) {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence {
        what: "aberth",
        iterations: ABERTH_MAX_ITER,
        best_residual: worst,
    })
}

/// Eigenvalues of an exact banded matrix refined from `starts` (rounded
/// to double-double). Entry `j` is the eigenvalue reached from `starts[j]`.
pub fn refine_eigenvalues(m: &BandedMatrix<Rational>, starts: &[Complex64]) -> Result<Vec<DdComplex>> {
    let poly = characteristic_polynomial(m);
    Ok(aberth_fixed(&poly, starts)?.iter().map(Fixed::to_dd).collect())
}

fn refine_eigenvalues_dd(m: &BandedMatrix<Rational>, starts: Vec<DdComplex>) -> Result<Vec<DdComplex>> {
    let s: Vec<Complex64> = starts.iter().map(|z| z.to_c64()).collect();
    refine_eigenvalues(m, &s)
}

/// `-z_j` for the zeros of `B_n^{(α)}`, polished as eigenvalues of the exact
/// Jacobi matrix.
pub fn negated_zeros_dd(n: usize, alpha: i64) -> Result<Vec<DdComplex>> {
    let zs = gbp_zeros(n, alpha as f64, 1e-12)?;
    let starts: Vec<Complex64> = zs.zeros.iter().map(|z| -z).collect();
    refine_eigenvalues(&jacobi_matrix_field(n, &Rational::from_int(alpha)), &starts)
}

fn power(z: DdComplex, p: u32) -> DdComplex {
    (1..p).fold(z, |acc, _| acc * z)
}

/// Rounds double-double values to double precision.
pub fn to_c64(v: &[DdComplex]) -> Vec<Complex64> {
    v.iter().map(|z| z.to_c64()).collect()
}

/// Largest deviation between two matched double-double spectra, evaluated
/// after differencing in double-double.
fn dd_deviation(a: &[DdComplex], b: &[DdComplex]) -> f64 {
    // Matching on the rounded values, differencing on the exact ones.
    let af = to_c64(a);
    let bf = to_c64(b);
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in af.iter().enumerate() {
        for (j, y) in bf.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut done = vec![false; a.len()];
    for (_, i, j) in pairs {
        if !done[i] && !used[j] {
            done[i] = true;
            used[j] = true;
            worst = worst.max((a[i] - b[j]).norm_f64());
        }
    }
    worst
}

/// One row of an eigenvalue perturbation study.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationPoint {
    pub n: usize,
    /// `max_j |μ̃_j - μ_j|` between the perturbed and the reference spectrum.
    pub max_deviation: f64,
    /// Largest reference eigenvalue modulus, for scale.
    pub spectral_radius: f64,
}

/// Spectral (exact-integration) second-order matrix against the squared
/// zeros of `B_n^{(4)}`, the exact spectrum of the pseudospectral matrix.
pub fn second_order_perturbation(n: usize) -> Result<PerturbationPoint> {
    if n < 2 {
        return Err(Error::InvalidParameter("second-order study needs N >= 2".into()));
    }
    let reference: Vec<DdComplex> = negated_zeros_dd(n, 4)?.into_iter().map(|z| power(z, 2)).collect();
    let m = mass_matrix_m2::<Rational>(n, SecondOrderVariant::Spectral);
    let perturbed = refine_eigenvalues_dd(&m, reference.clone())?;
    Ok(point(n, &perturbed, &reference))
}

/// Third-order matrix against cubes of the negated zeros of `B_n^{(5)}`,
/// the exact spectrum of `breve³`.
pub fn third_order_perturbation(n: usize) -> Result<PerturbationPoint> {
    if n < 3 {
        return Err(Error::InvalidParameter("third-order study needs N >= 3".into()));
    }
    let reference: Vec<DdComplex> = negated_zeros_dd(n, 5)?.into_iter().map(|z| power(z, 3)).collect();
    let perturbed = refine_eigenvalues_dd(&mass_matrix_m3::<Rational>(n), reference.clone())?;
    Ok(point(n, &perturbed, &reference))
}

fn point(n: usize, perturbed: &[DdComplex], reference: &[DdComplex]) -> PerturbationPoint {
    PerturbationPoint {
        n,
        max_deviation: dd_deviation(perturbed, reference),
        spectral_radius: reference.iter().map(|z| z.norm_f64()).fold(0.0, f64::max),
    }
}

/// Least-squares slope of `log |y|` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Entry-level comparison of the third-order matrix with `breve³`.
#[derive(Debug, Clone, Serialize)]
pub struct BreveDifference {
    pub n: usize,
    /// Non-zero positions of `M^{(3)} - breve³`, computed exactly.
    pub support: Vec<(usize, usize)>,
    pub max_entry: f64,
    pub norm_inf: f64,
}

pub fn breve_difference(n: usize) -> Result<BreveDifference> {
    if n < 3 {
        return Err(Error::InvalidParameter("third-order matrix needs N >= 3".into()));
    }
    let diff = mass_matrix_m3::<Rational>(n).sub(&breve_matrix::<Rational>(n).pow(3));
    let support = diff.support();
    let max_entry = support
        .iter()
        .map(|&(i, j)| Field::to_f64(&diff.get(i, j)).abs())
        .fold(0.0, f64::max);
    Ok(BreveDifference {
        n,
        support,
        max_entry,
        norm_inf: diff.norm_inf(),
    })
}

/// Double-precision QR eigenvalues of the collocation mass matrix against
/// the zeros of `B_n^{(2)}`.
#[derive(Debug, Clone, Serialize)]
pub struct InstabilityReport {
    pub n: usize,
    pub naive: Vec<Complex64>,
    pub reference: Vec<Complex64>,
    pub max_deviation: f64,
    /// `‖F‖∞` of the reference zeros.
    pub reference_residual: f64,
}

pub fn instability_demo(n: usize) -> Result<InstabilityReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let naive = eigenvalues(&mass_matrix_legendre_test::<f64>(n).to_dense())?;
    let zs = gbp_zeros(n, 2.0, 1e-12)?;
    let reference: Vec<Complex64> = zs.zeros.iter().map(|z| -z).collect();
    Ok(InstabilityReport {
        n,
        max_deviation: matched_max_deviation(&naive, &reference),
        naive,
        reference,
        reference_residual: zs.residual_inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_recovers_small_spectrum() {
        // M at N = 2 has eigenvalues 0.4 ± 0.2i.
        let m = crate::ldpg::mass::mass_matrix_m1::<Rational>(2);
        let ev = refine_eigenvalues(&m, &[Complex64::new(0.5, 0.1), Complex64::new(0.3, -0.3)]).unwrap();
        let c = to_c64(&ev);
        assert!((c[0] - Complex64::new(0.4, 0.2)).norm() < 1e-15);
        assert!((c[1] - Complex64::new(0.4, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn polished_zeros_are_jacobi_eigenvalues() {
        let z = to_c64(&negated_zeros_dd(10, 3).unwrap());
        let dense = eigenvalues(&crate::gbp::jacobi_matrix(10, 3.0).to_dense()).unwrap();
        assert!(matched_max_deviation(&z, &dense) < 1e-10);
    }

    #[test]
    fn breve_difference_support() {
        let d = breve_difference(8).unwrap();
        assert_eq!(d.support, vec![(6, 7), (7, 6), (7, 7)]);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [16.0, 32.0, 64.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(-3)).collect();
        assert!((loglog_slope(&x, &y) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_instability_case_agrees() {
        let r = instability_demo(10).unwrap();
        assert!(r.max_deviation < 1e-8);
    }
}
