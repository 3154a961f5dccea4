//! Generalised Bessel polynomials `B_n^{(α,β)}`: recurrence, evaluation,
//! Jacobi matrices, zero enclosures and a Newton solver for the zeros.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::banded::{BandedMatrix, TriDiagonalMatrix};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{ComplexMatrix, LuFactor};

/// Degree and parameters of `B_n^{(α,β)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbpParams {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl GbpParams {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter("alpha and beta must be finite".into()));
        }
        if beta == 0.0 {
            return Err(Error::InvalidParameter("beta must be non-zero".into()));
        }
        if alpha <= 0.0 && alpha.fract() == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "-alpha = {} is a non-negative integer",
                -alpha
            )));
        }
        if n >= 1 && n as f64 + alpha - 1.0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "n + alpha - 1 = {} must be positive",
                n as f64 + alpha - 1.0
            )));
        }
        Ok(Self { n, alpha, beta })
    }

    /// Parameters with the default `β = 2`.
    pub fn standard(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, alpha, 2.0)
    }
}

/// `(a_n, b_n, c_n)` of `B_{n+1} = (a_n z/β + b_n) B_n + c_n B_{n-1}`.
pub fn recurrence_coeffs(n: usize, alpha: f64) -> Result<(f64, f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("recurrence index starts at 1".into()));
    }
    let nf = n as f64;
    let d1 = nf + alpha - 1.0;
    let d2 = 2.0 * nf + alpha - 2.0;
    if d1 <= 0.0 || d2 == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "recurrence undefined for n = {n}, alpha = {alpha}"
        )));
    }
    let a = (2.0 * nf + alpha) * (2.0 * nf + alpha - 1.0) / d1;
    let b = (alpha - 2.0) * (2.0 * nf + alpha - 1.0) / (d1 * d2);
    let c = nf * (2.0 * nf + alpha) / (d1 * d2);
    Ok((a, b, c))
}

/// Same coefficients over any [`Field`], with `α` given in that field.
fn recurrence_coeffs_field<T: Field>(n: usize, alpha: &T) -> (T, T, T) {
    let nn = T::from_int(n as i64);
    let two = T::from_int(2);
    let one = T::one();
    let d1 = nn.clone() + alpha.clone() - one.clone();
    let d2 = two.clone() * nn.clone() + alpha.clone() - two.clone();
    let e1 = two.clone() * nn.clone() + alpha.clone();
    let e2 = e1.clone() - one;
    let a = e1.clone() * e2.clone() / d1.clone();
    let b = (alpha.clone() - two) * e2 / (d1.clone() * d2.clone());
    let c = nn * e1 / (d1 * d2);
    (a, b, c)
}

const OVERFLOW_LIMIT: f64 = 1e280;

/// Values `B_0(z), ..., B_n(z)` from the three-term recurrence.
pub fn gbp_eval(params: &GbpParams, z: Complex64) -> Result<Vec<Complex64>> {
    let GbpParams { n, alpha, beta } = *params;
    let w = z / beta;
    let mut b = Vec::with_capacity(n + 1);
    b.push(Complex64::new(1.0, 0.0));
    if n == 0 {
        return Ok(b);
    }
    b.push(1.0 + alpha * w);
    for k in 1..n {
        let (a, bb, c) = recurrence_coeffs(k, alpha)?;
        let next = (a * w + bb) * b[k] + c * b[k - 1];
        if !next.is_finite() || next.norm() > OVERFLOW_LIMIT {
            return Err(Error::Overflow { degree: k + 1 });
        }
        b.push(next);
    }
    Ok(b)
}

/// `B_n(z)` from the explicit sum `Σ_k C(n,k) (n+α-1)_k (z/β)^k`.
pub fn gbp_explicit(params: &GbpParams, z: Complex64) -> Complex64 {
    let GbpParams { n, alpha, beta } = *params;
    let w = z / beta;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..n {
        let kf = k as f64;
        // ratio of consecutive terms: C(n,k+1)/C(n,k) * (n+α-1+k) * w
        term *= (n as f64 - kf) / (kf + 1.0) * (n as f64 + alpha - 1.0 + kf) * w;
        sum += term;
    }
    sum
}

/// Jacobi matrix `J` with `-z b(z) = J b(z) - τ B_n(z) e_n` (`β = 2`); its
/// eigenvalues are the negated zeros of `B_n^{(α)}`.
pub fn jacobi_matrix(n: usize, alpha: f64) -> TriDiagonalMatrix<f64> {
    jacobi_matrix_field(n, &alpha)
}

/// Jacobi matrix over an arbitrary field (exact for rational `α`).
pub fn jacobi_matrix_field<T: Field>(n: usize, alpha: &T) -> TriDiagonalMatrix<T> {
    let mut m = BandedMatrix::zeros(n, 1, 1);
    if n == 0 {
        return m;
    }
    let two = T::from_int(2);
    let r0 = two.clone() / alpha.clone();
    m.set(0, 0, r0.clone());
    if n > 1 {
        m.set(0, 1, -r0);
    }
    for j in 1..n {
        let (a, b, c) = recurrence_coeffs_field(j, alpha);
        m.set(j, j - 1, two.clone() * c / a.clone());
        m.set(j, j, two.clone() * b / a.clone());
        if j + 1 < n {
            m.set(j, j + 1, -(two.clone() / a));
        }
    }
    m
}

/// Coefficient `τ_n` of the remainder term `τ_n B_n(z) e_n`.
pub fn jacobi_remainder(n: usize, alpha: f64) -> f64 {
    if n <= 1 {
        2.0 / alpha
    } else {
        2.0 / recurrence_coeffs(n - 1, alpha).expect("valid parameters").0
    }
}

/// Asymptotic location of the unique real zero for odd `n`.
pub fn real_zero_estimate(n: usize, alpha: f64) -> f64 {
    -2.0 / (1.3254868 * n as f64 + 1.00628995 * alpha - 1.34983648)
}

/// Crescent-shaped enclosure of the zeros of `B_n^{(α)}` (`n ≥ 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrescentRegion {
    pub n: usize,
    pub alpha: f64,
    pub inner_radius: f64,
    pub cardioid_scale: f64,
    pub sector_angle: f64,
}

/// Relative slack on the cardioid bound absorbing rounding in `|z|`.
const CARDIOID_SLACK: f64 = 1e-12;

impl CrescentRegion {
    pub fn new(n: usize, alpha: f64) -> Self {
        let nf = n as f64;
        Self {
            n,
            alpha,
            inner_radius: 2.0 / (2.0 * nf + alpha - 2.0 / 3.0),
            cardioid_scale: 1.0 / (nf + alpha - 1.0),
            sector_angle: (-alpha / (2.0 * nf + alpha - 2.0)).clamp(-1.0, 1.0).acos(),
        }
    }

    /// `inner_radius < |z| ≤ cardioid_scale·(1 - cos θ)` and `|θ| > Θ`.
    ///
    /// The cardioid bound is treated as inclusive at every angle.
    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm();
        let theta = z.arg();
        let outer = self.cardioid_scale * (1.0 - theta.cos());
        r > self.inner_radius && r <= outer * (1.0 + CARDIOID_SLACK) && theta.abs() > self.sector_angle
    }

    /// Radius of the curve midway between the inner circle and the cardioid.
    pub fn mid_radius(&self, theta: f64) -> f64 {
        0.5 * (self.inner_radius + self.cardioid_scale * (1.0 - theta.cos()))
    }
}

const ADMISSIBILITY_TOL: f64 = 1e-14;

/// Residual `F` of the zero characterisation and its Jacobian.
///
/// `F_i = α/(2z_i) + 1/z_i² + Σ_{j≠i} 1/(z_i - z_j)` vanishes exactly at the
/// zeros of `B_n^{(α)}`.
pub fn pasquini_residual(alpha: f64, z: &[Complex64]) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    check_admissible(z)?;
    let n = z.len();
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    let mut jac = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let zi = z[i];
        let inv = 1.0 / zi;
        let mut fi = 0.5 * alpha * inv + inv * inv;
        let mut jii = -0.5 * alpha * inv * inv - 2.0 * inv * inv * inv;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = 1.0 / (zi - z[j]);
            fi += d;
            jii -= d * d;
            jac[(i, j)] = d * d;
        }
        f[i] = fi;
        jac[(i, i)] = jii;
    }
    Ok((f, jac))
}

/// Residual only; cheaper than [`pasquini_residual`].
pub fn pasquini_f(alpha: f64, z: &[Complex64]) -> Result<Vec<Complex64>> {
    check_admissible(z)?;
    Ok(residual_unchecked(alpha, z))
}

fn residual_unchecked(alpha: f64, z: &[Complex64]) -> Vec<Complex64> {
    (0..z.len())
        .map(|i| {
            let inv = 1.0 / z[i];
            let mut fi = 0.5 * alpha * inv + inv * inv;
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    fi += 1.0 / (z[i] - zj);
                }
            }
            fi
        })
        .collect()
}

fn check_admissible(z: &[Complex64]) -> Result<()> {
    for (i, &zi) in z.iter().enumerate() {
        if !zi.is_finite() || zi.norm() < ADMISSIBILITY_TOL {
            return Err(Error::Admissibility(format!("|z_{i}| = {:e}", zi.norm())));
        }
        for (j, &zj) in z.iter().enumerate().skip(i + 1) {
            if (zi - zj).norm() < ADMISSIBILITY_TOL {
                return Err(Error::Admissibility(format!("z_{i} and z_{j} coincide")));
            }
        }
    }
    Ok(())
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Zeros of `B_n^{(α,β)}` with metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GbpZeroSet {
    pub params: GbpParams,
    /// Sorted by imaginary part, then real part.
    pub zeros: Vec<Complex64>,
    /// `‖F‖∞` at the returned (β = 2) zeros.
    pub residual_inf: f64,
    pub newton_steps: usize,
    /// Name of the strategy that converged.
    pub strategy: &'static str,
}

impl GbpZeroSet {
    /// Zeros of `B_n^{(α,β)}`: those for `β = 2` scaled by `β/2`.
    pub fn with_beta(&self, beta: f64) -> Result<GbpZeroSet> {
        let params = GbpParams::new(self.params.n, self.params.alpha, beta)?;
        let s = beta / self.params.beta;
        Ok(GbpZeroSet {
            params,
            zeros: self.zeros.iter().map(|&z| z * s).collect(),
            ..self.clone()
        })
    }
}

const MAX_NEWTON: usize = 200;

/// Zeros of `B_n^{(α)}` (`β = 2`) by Newton's method on the residual system
/// of [`pasquini_residual`].
///
/// Plain Newton from a mid-crescent initial guess is tried first; on failure
/// damped Newton, degree continuation and randomly perturbed guesses follow.
pub fn gbp_zeros(n: usize, alpha: f64, tol: f64) -> Result<GbpZeroSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    if alpha < -1.0 {
        return Err(Error::InvalidParameter("alpha must be at least -1".into()));
    }
    let params = GbpParams::standard(n, alpha)?;
    if n == 1 {
        let z = vec![Complex64::new(-2.0 / alpha, 0.0)];
        let residual_inf = inf_norm(&residual_unchecked(alpha, &z));
        return Ok(GbpZeroSet {
            params,
            zeros: z,
            residual_inf,
            newton_steps: 0,
            strategy: "closed-form",
        });
    }
    let target = tol * n as f64;
    let guess = initial_guess(n, alpha);
    let mut best_residual = f64::INFINITY;

    let mut attempt = |name: &'static str, start: Vec<Complex64>, damped: bool| -> Option<GbpZeroSet> {
        match newton(alpha, start, target, damped) {
            Ok((z, steps)) => match symmetrise(&z, n) {
                Some(sym) => {
                    let residual_inf = inf_norm(&residual_unchecked(alpha, &sym));
                    best_residual = best_residual.min(residual_inf);
                    if residual_inf <= target {
                        Some(GbpZeroSet {
                            params,
                            zeros: sym,
                            residual_inf,
                            newton_steps: steps,
                            strategy: name,
                        })
                    } else {
                        None
                    }
                }
                None => None,
            },
            Err(r) => {
                best_residual = best_residual.min(r);
                None
            }
        }
    };

    if let Some(set) = attempt("newton", guess.clone(), false) {
        return Ok(set);
    }
    log::debug!("plain Newton failed for n = {n}, alpha = {alpha}; trying damped Newton");
    if let Some(set) = attempt("damped-newton", guess.clone(), true) {
        return Ok(set);
    }
    if let Ok(prev) = gbp_zeros(n - 1, alpha, tol) {
        let scale = (n as f64 + alpha - 2.0) / (n as f64 + alpha - 1.0);
        let mut start: Vec<Complex64> = prev.zeros.iter().map(|&z| z * scale).collect();
        let region = CrescentRegion::new(n, alpha);
        let theta = 0.5 * (region.sector_angle + std::f64::consts::PI);
        start.push(Complex64::from_polar(region.mid_radius(theta), theta));
        if let Some(set) = attempt("degree-continuation", start, true) {
            return Ok(set);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let perturbed: Vec<Complex64> = guess
        .iter()
        .map(|&z| {
            let d = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            z * (1.0 + 1e-3 * d)
        })
        .collect();
    if let Some(set) = attempt("random-perturbation", perturbed, true) {
        return Ok(set);
    }
    Err(Error::NonConvergence {
        what: "GBP zero Newton iteration",
        iterations: MAX_NEWTON,
        best_residual,
    })
}

/// Conjugate-symmetric points on the mid-curve of the crescent.
fn initial_guess(n: usize, alpha: f64) -> Vec<Complex64> {
    let region = CrescentRegion::new(n, alpha);
    let pi = std::f64::consts::PI;
    let mut z = Vec::with_capacity(n);
    for j in 0..n / 2 {
        // s in (0, 1): distance from the negative real axis along the arc.
        let s = (2 * j + 1 + n % 2) as f64 / (n as f64 + 1.0);
        let theta = pi - (pi - region.sector_angle) * s;
        let w = Complex64::from_polar(region.mid_radius(theta), theta);
        z.push(w);
        z.push(w.conj());
    }
    if n % 2 == 1 {
        z.push(Complex64::new(real_zero_estimate(n, alpha), 0.0));
    }
    z
}

/// Newton iteration; returns the final iterate and step count, or the best
/// residual norm seen on failure.
fn newton(
    alpha: f64,
    mut z: Vec<Complex64>,
    target: f64,
    damped: bool,
) -> std::result::Result<(Vec<Complex64>, usize), f64> {
    let mut best = f64::INFINITY;
    let mut converged_at: Option<usize> = None;
    for step in 0..MAX_NEWTON {
        let (f, jac) = match pasquini_residual(alpha, &z) {
            Ok(v) => v,
            Err(_) => return Err(best),
        };
        let fnorm = inf_norm(&f);
        if !fnorm.is_finite() {
            return Err(best);
        }
        best = best.min(fnorm);
        if fnorm <= target {
            // Two extra steps drive the residual to rounding level.
            match converged_at {
                Some(s) if step >= s + 2 => return Ok((z, step)),
                None => converged_at = Some(step),
                _ => {}
            }
        }
        let lu = match LuFactor::new(&jac) {
            Ok(lu) => lu,
            Err(_) => return Err(best),
        };
        let delta = lu.solve_vec(&f);
        if !damped {
            for (zi, d) in z.iter_mut().zip(&delta) {
                *zi -= d;
            }
            continue;
        }
        let f2: f64 = f.iter().map(|x| x.norm_sqr()).sum();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Complex64> = z.iter().zip(&delta).map(|(&zi, &d)| zi - lambda * d).collect();
            if let Ok(ft) = pasquini_f(alpha, &trial) {
                let t2: f64 = ft.iter().map(|x| x.norm_sqr()).sum();
                if t2.is_finite() && t2 <= (1.0 - 1e-4 * lambda) * f2 {
                    z = trial;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            if converged_at.is_some() {
                return Ok((z, step));
            }
            return Err(best);
        }
    }
    match converged_at {
        Some(_) => Ok((z, MAX_NEWTON)),
        None => Err(best),
    }
}

/// Pairs zeros with the nearest conjugate and replaces each pair by an exact
/// conjugate pair; near-real zeros become real. Returns `None` when the set
/// cannot be paired consistently with the parity of `n`.
fn symmetrise(z: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    let scale = z.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let real_tol = 1e-9 * scale;
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for &w in z {
        if w.im.abs() <= real_tol {
            reals.push(Complex64::new(w.re, 0.0));
        } else if w.im > 0.0 {
            upper.push(w);
        } else {
            lower.push(w);
        }
    }
    if upper.len() != lower.len() || reals.len() != n % 2 {
        return None;
    }
    let mut used = vec![false; lower.len()];
    let mut out = reals;
    for &u in &upper {
        let (k, _) = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, l)| (k, (l.conj() - u).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        used[k] = true;
        let w = (u + lower[k].conj()) * 0.5;
        out.push(w);
        out.push(w.conj());
    }
    out.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    Some(out)
}
