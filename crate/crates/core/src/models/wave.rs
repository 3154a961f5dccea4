//! Linear wave-type equation `∂²_{xt} u + σ u = 0` on `(x_L, x_R) × (0, T)`
//! with `u(x, 0) = u_0(x)` and `u(x_L, t) = 0`.
//!
//! With `x = x_L + (ξ + 1) s`, `s = (x_R - x_L)/2`, and `u = Σ_k c_k(t) φ_k(ξ)`
//! in the first-order trial basis, testing against the dual basis gives
//! `c' + σ s M_x c = 0`. On a time slab of length `h` this is the reference
//! system with `σ̂ = σ (x_R - x_L) h / 4`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gbp::gbp_zeros;
use crate::ldpg::mass::mass_matrix_m1;
use crate::linalg::{cond2, eigenvalues, Matrix};
use crate::polybasis::project;
use crate::timesolver::{march, time_basis_values, SlabGrid, SpaceTimeSolution, Strategy};
use crate::Complex64;

use super::{Domain, Profile};

/// Largest `|u_0(x_L)|` accepted as compatible with the boundary condition.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Clone)]
pub struct WaveProblem {
    pub sigma: f64,
    pub domain: Domain,
    pub horizon: f64,
    pub u0: Profile,
    pub nx: usize,
    pub nt: usize,
    pub slabs: usize,
}

impl std::fmt::Debug for WaveProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaveProblem")
            .field("sigma", &self.sigma)
            .field("domain", &self.domain)
            .field("horizon", &self.horizon)
            .field("nx", &self.nx)
            .field("nt", &self.nt)
            .field("slabs", &self.slabs)
            .finish_non_exhaustive()
    }
}

impl WaveProblem {
    /// The sech² pulse `sech²(√3(x+35)/6) - sech²(5√3/2)` on `(-50, 50)`
    /// with `σ = 1`.
    pub fn pulse(nx: usize, nt: usize, slabs: usize, horizon: f64) -> Self {
        Self {
            sigma: 1.0,
            domain: Domain::new(-50.0, 50.0),
            horizon,
            u0: Arc::new(pulse_profile),
            nx,
            nt,
            slabs,
        }
    }

    /// `σ̂` of one slab on the reference square.
    pub fn sigma_hat(&self) -> f64 {
        self.sigma * self.domain.length() * self.horizon / (4.0 * self.slabs as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        self.domain.validate()?;
        if self.nx == 0 {
            return Err(Error::InvalidParameter("N_x must be at least 1".into()));
        }
        SlabGrid::new(self.horizon, self.slabs, self.nt)?;
        let left = (self.u0)(self.domain.left);
        if left.abs() > COMPATIBILITY_TOL || !left.is_finite() {
            return Err(Error::Incompatible { value: left });
        }
        Ok(())
    }
}

pub fn pulse_profile(x: f64) -> f64 {
    let sech2 = |y: f64| 1.0 / y.cosh().powi(2);
    let r3 = 3f64.sqrt();
    sech2(r3 * (x + 35.0) / 6.0) - sech2(2.5 * r3)
}

/// `σ̂ M_x`.
pub fn wave_spatial_operator(nx: usize, sigma_hat: f64) -> Matrix<f64> {
    mass_matrix_m1::<f64>(nx).to_dense().scale(sigma_hat)
}

/// Coefficients of `v(ξ)` in `φ_k = (k+1)/√2 (P_k + P_{k+1})`, `k < n`.
///
/// `v` is projected onto Legendre polynomials up to degree `n`, the top
/// coefficient is adjusted so the series vanishes at `ξ = -1`, and the
/// lower bidiagonal system `a_i = ((i+1) c_i + i c_{i-1})/√2` is solved
/// forwards.
pub fn first_order_coefficients(v: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let mut a = project(v, n).coeffs;
    let at_minus_one: f64 = a[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 0 { *c } else { -c })
        .sum();
    a[n] = if n % 2 == 0 { -at_minus_one } else { at_minus_one };
    let r2 = std::f64::consts::SQRT_2;
    let mut c = vec![0.0; n];
    for i in 0..n {
        let prev = if i > 0 { i as f64 * c[i - 1] } else { 0.0 };
        c[i] = (r2 * a[i] - prev) / (i as f64 + 1.0);
    }
    c
}

/// Computed wave field.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    pub domain: Domain,
    pub nx: usize,
    pub time: SpaceTimeSolution,
}

impl WaveSolution {
    /// `u(x, t)` at the points `xs`.
    pub fn values(&self, xs: &[f64], t: f64) -> Vec<f64> {
        let c = self.time.evaluate(t);
        xs.iter()
            .map(|&x| {
                let phi = time_basis_values(self.nx, self.domain.to_reference(x));
                phi.iter().zip(&c).map(|(p, c)| p * c).sum()
            })
            .collect()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.values(&[x], t)[0]
    }
}

pub fn solve_wave(p: &WaveProblem, strategy: Strategy) -> Result<WaveSolution> {
    p.validate()?;
    let u0 = first_order_coefficients(|xi| (p.u0)(p.domain.to_physical(xi)), p.nx);
    // Physical-time operator σ s M_x; march rescales it by h/2 per slab.
    let a = wave_spatial_operator(p.nx, p.sigma * p.domain.half_length());
    let grid = SlabGrid::new(p.horizon, p.slabs, p.nt)?;
    Ok(WaveSolution {
        domain: p.domain,
        nx: p.nx,
        time: march(&grid, &a, None, &u0, strategy)?,
    })
}

/// One row of the conditioning table of `I + M_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditioningRow {
    pub nx: usize,
    pub cond2: f64,
    /// Extreme moduli of the eigenvalues `1 - z_j`, `z_j` the zeros of
    /// `B_{N_x}^{(3)}`.
    pub min_modulus: f64,
    pub max_modulus: f64,
    /// The same from a dense double-precision eigen solve. The matrix is
    /// far from normal, so beyond `N_x ≈ 25` the largest computed modulus
    /// is set by rounding and stays near 1.05 instead of tending to 1.
    pub dense_min_modulus: f64,
    pub dense_max_modulus: f64,
}

fn extreme_moduli(values: &[Complex64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| {
        let m = z.norm();
        (lo.min(m), hi.max(m))
    })
}

/// `cond2(I + M_x)` and the extreme eigenvalue moduli, both from the
/// polynomial zeros and from a dense eigen solve.
pub fn conditioning(nx: usize) -> Result<ConditioningRow> {
    if nx == 0 {
        return Err(Error::InvalidParameter("N_x must be at least 1".into()));
    }
    let mut a = mass_matrix_m1::<f64>(nx).to_dense();
    for i in 0..nx {
        a[(i, i)] += 1.0;
    }
    let shifted: Vec<Complex64> = gbp_zeros(nx, 3.0, 1e-10)?.zeros.iter().map(|z| 1.0 - z).collect();
    let (min_modulus, max_modulus) = extreme_moduli(&shifted);
    let (dense_min_modulus, dense_max_modulus) = extreme_moduli(&eigenvalues(&a)?);
    Ok(ConditioningRow {
        nx,
        cond2: cond2(&a)?,
        min_modulus,
        max_modulus,
        dense_min_modulus,
        dense_max_modulus,
    })
}
