//! Model initial value problems `u^{(m)} = σ u` on `[-1, 1]` with
//! `u^{(l)}(-1) = u_l`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpg::basis::{compact_basis, Side};
use crate::ldpg::mass::{identity_minus, mass_matrix_m1, mass_matrix_m2, mass_matrix_m3, SecondOrderVariant};
use crate::linalg::{lu_solve, ComplexMatrix, LuFactor, Matrix};
use crate::polybasis::{gauss_rule, project, LegendreSeries};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IvpStrategy {
    /// One LDPG scheme of order `m` with all initial conditions imposed
    /// exactly (`m ≤ 3`).
    Direct,
    /// Rewrite as `m` coupled first-order equations and eliminate down to
    /// `(I - σ M^m) ŵ_0 = rhs`.
    FirstOrderSystem,
}

/// Computed solution of a model IVP.
#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub order: usize,
    pub sigma: f64,
    pub inits: Vec<f64>,
    pub strategy: IvpStrategy,
    /// Coefficients of the homogeneous part in the trial basis (order `m`
    /// for the direct scheme, order 1 for the first-order system).
    pub coeffs: Vec<f64>,
    series: LegendreSeries,
}

impl IvpSolution {
    pub fn eval(&self, t: f64) -> f64 {
        self.series.eval(t)
    }

    /// Full Legendre expansion of `u_N`, lift included.
    pub fn series(&self) -> &LegendreSeries {
        &self.series
    }
}

/// Taylor lift `Σ_l u_l (1+t)^l / l!`.
fn lift(inits: &[f64], t: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for (l, &u) in inits.iter().enumerate() {
        if l > 0 {
            term *= (1.0 + t) / l as f64;
        }
        sum += u * term;
    }
    sum
}

fn resonance(e: Error) -> Error {
    match e {
        Error::SingularMatrix { pivot_index } => Error::Resonance { index: pivot_index },
        other => other,
    }
}

fn solve_dense(a: &Matrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    Ok(LuFactor::new(a).map_err(resonance)?.solve_vec(b))
}

pub fn solve_ivp(m: usize, sigma: f64, inits: &[f64], n: usize, strategy: IvpStrategy) -> Result<IvpSolution> {
    if m == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if inits.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: inits.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be finite and non-zero, got {sigma}"
        )));
    }
    let (basis_order, coeffs) = match strategy {
        IvpStrategy::Direct => (m, solve_direct(m, sigma, inits, n)?),
        IvpStrategy::FirstOrderSystem => (1, solve_first_order_system(m, sigma, inits, n)?),
    };
    let lift_inits: &[f64] = if strategy == IvpStrategy::Direct {
        inits
    } else {
        &inits[..1]
    };
    let mut legendre = project(|t| lift(lift_inits, t), lift_inits.len() - 1).coeffs;
    legendre.resize(n + basis_order, 0.0);
    for (k, &c) in coeffs.iter().enumerate() {
        let phi = compact_basis(basis_order, Side::Trial, k)?;
        for (i, &w) in phi.combo.iter().enumerate() {
            legendre[k + i] += c * phi.scale * w;
        }
    }
    Ok(IvpSolution {
        order: m,
        sigma,
        inits: inits.to_vec(),
        strategy,
        coeffs,
        series: LegendreSeries::new(legendre),
    })
}

fn solve_direct(m: usize, sigma: f64, inits: &[f64], n: usize) -> Result<Vec<f64>> {
    let a = match m {
        1 => identity_minus(&mass_matrix_m1::<f64>(n), sigma),
        2 => {
            if n < 2 {
                return Err(Error::InvalidParameter("second-order scheme needs N >= 2".into()));
            }
            identity_minus(&mass_matrix_m2::<f64>(n, SecondOrderVariant::Pseudospectral), sigma)
        }
        3 => {
            if n < 3 {
                return Err(Error::InvalidParameter("third-order scheme needs N >= 3".into()));
            }
            identity_minus(&mass_matrix_m3::<f64>(n), sigma)
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "direct scheme supports orders 1..=3, got {m}"
            )))
        }
    };
    let rule = gauss_rule(n + m + 8);
    let lift_vals: Vec<f64> = rule.nodes.iter().map(|&t| lift(inits, t)).collect();
    let mut g = Vec::with_capacity(n);
    for j in 0..n {
        let psi = compact_basis(m, Side::Test, j)?.legendre();
        let ip: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .zip(&lift_vals)
            .map(|((&t, &w), &v)| w * v * psi.eval(t))
            .sum();
        g.push(sigma * ip);
    }
    solve_dense(&a, &g)
}

fn solve_first_order_system(m: usize, sigma: f64, inits: &[f64], n: usize) -> Result<Vec<f64>> {
    let mm = mass_matrix_m1::<f64>(n);
    let a = identity_minus(&mm.pow(m as u32), sigma);
    // ĝ_l = (u_l, φ_j^*) = √2 u_l e_1.
    let unit = |scale: f64| {
        let mut v = vec![0.0; n];
        v[0] = std::f64::consts::SQRT_2 * scale;
        v
    };
    // Horner form of σ M^{m-1} ĝ_0 + Σ_{l=1}^{m-1} M^{l-1} ĝ_l.
    let mut rhs = unit(sigma * inits[0]);
    for l in (1..m).rev() {
        rhs = mm.mul_vec(&rhs);
        for (r, u) in rhs.iter_mut().zip(unit(inits[l])) {
            *r += u;
        }
    }
    solve_dense(&a, &rhs)
}

/// Exact solution `Σ_k c_k e^{r_k (t+1)}` over the `m` roots of `r^m = σ`,
/// with `c` from the Vandermonde system of the initial conditions.
pub fn exact_solution(sigma: f64, inits: &[f64]) -> Result<impl Fn(f64) -> f64> {
    let m = inits.len();
    if m == 0 || sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParameter("need m >= 1 and finite non-zero sigma".into()));
    }
    let radius = sigma.abs().powf(1.0 / m as f64);
    let phase = if sigma < 0.0 { std::f64::consts::PI } else { 0.0 };
    let roots: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(radius, (phase + 2.0 * std::f64::consts::PI * k as f64) / m as f64))
        .collect();
    let v = ComplexMatrix::from_fn(m, m, |l, k| roots[k].powu(l as u32));
    let rhs = ComplexMatrix::from_fn(m, 1, |l, _| Complex64::new(inits[l], 0.0));
    let c = lu_solve(&v, &rhs)?.column(0);
    Ok(move |t: f64| {
        roots
            .iter()
            .zip(&c)
            .map(|(r, c)| c * (r * (t + 1.0)).exp())
            .sum::<Complex64>()
            .re
    })
}
