//! KdV-type equation
//! `U_t + α U U_x + ε² U_xxx + σ ∂_x^{-1} U = 0` on `(x_L, x_R) × (0, T)`
//! with `U(x_L) = U(x_R) = U_x(x_R) = 0` and the symmetric primitive
//! `∂_x^{-1} U = ½(∫_{x_L}^x U - ∫_x^{x_R} U)`.
//!
//! In space the trial functions satisfy `φ(±1) = φ'(1) = 0` and the test
//! functions `ψ(±1) = ψ'(-1) = 0`; both are combinations of four
//! consecutive Legendre polynomials scaled so that `(φ_k''', ψ_j) = δ_jk`.
//! On a slab of length `h`, with `x = x_L + (ξ + 1) s` and `V = Σ_k c_k φ_k`,
//! the time coefficients `Û` of `c(τ) = c_0 + Σ_m Û_m φ_m(τ)` solve
//!
//! ```text
//! Û M_xᵀ + M_t Û Bᵀ + √2 e_1 (B c_0)ᵀ + N̂(Û) = 0,
//! B = (h/2) [(ε²/s³) I + σ s K],    K_jk = (∂^{-1} φ_k, ψ_j),
//! N̂_ij = -(h/2)(α/s) ∫∫ ½ V² ψ_j' φ_i^* dξ dτ,
//! ```
//!
//! which is solved by Newton's method with GMRES, preconditioned by the
//! QZ solve of the linear part.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpg::basis::{endpoint_combo, kdv_conditions, rational_to_f64, Side};
use crate::ldpg::mass::mass_matrix_m1;
use crate::linalg::Matrix;
use crate::polybasis::{antiderivative, gauss_rule, legendre_values, LegendreSeries};
use crate::timesolver::{time_basis_values, QzSolver, Slab, SpaceTimeSolution};

use super::gmres::gmres;
use super::{Domain, Profile};

/// Largest `|U_0|` accepted at either endpoint.
pub const ENDPOINT_TOL: f64 = 1e-8;
/// Unknowns per slab used to pick the default slab count.
pub const SLAB_BUDGET: usize = 8000;
/// GMRES restart length.
pub const GMRES_RESTART: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 30,
        }
    }
}

#[derive(Clone)]
pub struct KdvProblem {
    pub alpha: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub domain: Domain,
    pub horizon: f64,
    pub u0: Profile,
    pub nx: usize,
    /// Time modes. With `slabs = Some(L)` this is the number per slab;
    /// with `None` it is the total, split over the fewest slabs keeping
    /// `N_x · N_t` per slab within [`SLAB_BUDGET`].
    pub nt: usize,
    pub slabs: Option<usize>,
    pub newton: NewtonSettings,
}

impl std::fmt::Debug for KdvProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KdvProblem")
            .field("alpha", &self.alpha)
            .field("epsilon", &self.epsilon)
            .field("sigma", &self.sigma)
            .field("domain", &self.domain)
            .field("horizon", &self.horizon)
            .field("nx", &self.nx)
            .field("nt", &self.nt)
            .field("slabs", &self.slabs)
            .field("newton", &self.newton)
            .finish_non_exhaustive()
    }
}

/// `sech²(√3 (x - t/3 + 5) / 6)`, the travelling wave of `α = ε = 1`,
/// `σ = 0`.
pub fn soliton(x: f64, t: f64) -> f64 {
    1.0 / (3f64.sqrt() * (x - t / 3.0 + 5.0) / 6.0).cosh().powi(2)
}

impl KdvProblem {
    /// Soliton initial data on `(-50, 50)` with the given coefficients.
    pub fn soliton(alpha: f64, epsilon: f64, sigma: f64, nx: usize, nt: usize, horizon: f64) -> Self {
        Self {
            alpha,
            epsilon,
            sigma,
            domain: Domain::new(-50.0, 50.0),
            horizon,
            u0: Arc::new(|x| soliton(x, 0.0)),
            nx,
            nt,
            slabs: None,
            newton: NewtonSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if !self.sigma.is_finite() {
            return Err(Error::InvalidParameter("sigma must be finite".into()));
        }
        self.domain.validate()?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.nx < 3 {
            return Err(Error::InvalidParameter("N_x must be at least 3".into()));
        }
        if self.nt == 0 || self.slabs == Some(0) {
            return Err(Error::InvalidParameter("N_t and L must be at least 1".into()));
        }
        if !(self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "Newton tolerance and iteration cap must be positive".into(),
            ));
        }
        for x in [self.domain.left, self.domain.right] {
            let v = (self.u0)(x);
            if v.abs() > ENDPOINT_TOL || !v.is_finite() {
                return Err(Error::Incompatible { value: v });
            }
        }
        Ok(())
    }

    /// `(L, modes per slab)`.
    pub fn slab_layout(&self) -> (usize, usize) {
        match self.slabs {
            Some(l) => (l, self.nt),
            None => {
                let l = (self.nx * self.nt).div_ceil(SLAB_BUDGET).max(1);
                (l, self.nt.div_ceil(l))
            }
        }
    }
}

/// Spatial operators of the KdV-type problem on `(-1, 1)`.
#[derive(Debug, Clone)]
pub struct KdvOperators {
    pub nx: usize,
    /// Legendre coefficients of `φ_k` (row `k`, length `N_x + 3`).
    pub trial: Matrix<f64>,
    /// Legendre coefficients of `ψ_j`.
    pub test: Matrix<f64>,
    /// `(φ_k, ψ_j)` at `(j, k)`.
    pub mass: Matrix<f64>,
    /// `(φ_k', ψ_j)` at `(j, k)`.
    pub first_derivative: Matrix<f64>,
    /// `(∂^{-1} φ_k, ψ_j)` at `(j, k)`.
    pub nonlocal: Matrix<f64>,
    /// Gauss nodes (`2 N_x`) for the quadratic term.
    pub nodes: Vec<f64>,
    /// `φ_k(ξ_p)` at `(p, k)`.
    pub trial_at_nodes: Matrix<f64>,
    /// `-½ w_p ψ_j'(ξ_p)` at `(j, p)`: maps nodal values of `V²` to
    /// `(V V_ξ, ψ_j)`.
    pub quadratic_form: Matrix<f64>,
}

fn legendre_inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| x * y * 2.0 / (2 * i + 1) as f64)
        .sum()
}

fn unit_combo(k: usize, side: Side, len: usize) -> Result<Vec<f64>> {
    let combo = rational_to_f64(&endpoint_combo(k, &kdv_conditions(side))?);
    let mut c = vec![0.0; len];
    c[k..k + 4].copy_from_slice(&combo);
    Ok(c)
}

/// `P_n'(x)` for `n = 0..=deg` from `P'_{n+1} = P'_{n-1} + (2n+1) P_n`.
fn legendre_derivatives(p: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; p.len()];
    for n in 1..p.len() {
        d[n] = (2 * n - 1) as f64 * p[n - 1] + if n >= 2 { d[n - 2] } else { 0.0 };
    }
    d
}

pub fn kdv_spatial_operators(nx: usize) -> Result<KdvOperators> {
    if nx < 3 {
        return Err(Error::InvalidParameter("N_x must be at least 3".into()));
    }
    let len = nx + 3;
    let mut trial = Matrix::zeros(nx, len);
    let mut test = Matrix::zeros(nx, len);
    for k in 0..nx {
        let phi = unit_combo(k, Side::Trial, len)?;
        let psi = unit_combo(k, Side::Test, len)?;
        let d3 = LegendreSeries::new(phi.clone()).derivative().derivative().derivative();
        let diag = legendre_inner(&d3.coeffs, &psi);
        // Split the normalisation evenly; the sign goes to the test side.
        let s = 1.0 / diag.abs().sqrt();
        for i in 0..len {
            trial[(k, i)] = s * phi[i];
            test[(k, i)] = s * diag.signum() * psi[i];
        }
    }
    let band = |j: usize, k: usize| j.abs_diff(k) <= 4;
    let mut mass = Matrix::zeros(nx, nx);
    let mut first_derivative = Matrix::zeros(nx, nx);
    let mut nonlocal = Matrix::zeros(nx, nx);
    for k in 0..nx {
        let phi = LegendreSeries::new(trial.row(k).to_vec());
        let dphi = phi.derivative();
        let prim = antiderivative(&phi);
        for j in 0..nx {
            let psi = test.row(j);
            if band(j, k) {
                mass[(j, k)] = legendre_inner(&phi.coeffs, psi);
                first_derivative[(j, k)] = legendre_inner(&dphi.coeffs, psi);
            }
            nonlocal[(j, k)] = legendre_inner(&prim.coeffs, psi);
        }
    }
    let rule = gauss_rule(2 * nx);
    let mut trial_at_nodes = Matrix::zeros(rule.len(), nx);
    let mut quadratic_form = Matrix::zeros(nx, rule.len());
    for (p, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let vals = legendre_values(len - 1, x);
        let ders = legendre_derivatives(&vals);
        for k in 0..nx {
            let (mut v, mut d) = (0.0, 0.0);
            for i in k..k + 4 {
                v += trial[(k, i)] * vals[i];
                d += test[(k, i)] * ders[i];
            }
            trial_at_nodes[(p, k)] = v;
            quadratic_form[(k, p)] = -0.5 * w * d;
        }
    }
    Ok(KdvOperators {
        nx,
        trial,
        test,
        mass,
        first_derivative,
        nonlocal,
        nodes: rule.nodes,
        trial_at_nodes,
        quadratic_form,
    })
}

impl KdvOperators {
    /// Trial coefficients of `v` from its Legendre projection to degree
    /// `N_x + 2`, by forward substitution on the lower-banded map from
    /// trial to Legendre coefficients. The top three Legendre modes only
    /// carry the boundary conditions and are discarded.
    pub fn coefficients_of(&self, v: impl Fn(f64) -> f64) -> Vec<f64> {
        let a = crate::polybasis::project(v, self.nx + 2).coeffs;
        let mut c = vec![0.0; self.nx];
        for i in 0..self.nx {
            let mut s = a[i];
            for k in i.saturating_sub(3)..i {
                s -= c[k] * self.trial[(k, i)];
            }
            c[i] = s / self.trial[(i, i)];
        }
        c
    }

    /// Legendre coefficients of `Σ_k c_k φ_k`.
    pub fn legendre_of(&self, c: &[f64]) -> LegendreSeries {
        let mut out = vec![0.0; self.nx + 3];
        for (k, &ck) in c.iter().enumerate() {
            for i in k..k + 4 {
                out[i] += ck * self.trial[(k, i)];
            }
        }
        LegendreSeries::new(out)
    }
}

/// Newton history of one slab.
#[derive(Debug, Clone, Serialize)]
pub struct NewtonReport {
    pub slab: usize,
    pub iterations: usize,
    pub residual: f64,
    pub gmres_iterations: usize,
    pub converged: bool,
}

/// Per-slab nonlinear system.
struct SlabSystem<'a> {
    ops: &'a KdvOperators,
    b_t: Matrix<f64>,
    mass_t: Matrix<f64>,
    mt: Matrix<f64>,
    /// `√2 e_1 (B c_0)ᵀ` folded into row 0.
    forcing: Vec<f64>,
    c0: Vec<f64>,
    /// Nonlinear coefficient `(h/2)(α/s)`.
    gamma: f64,
    /// `φ_m(τ_q)` at `(q, m)`.
    time_trial: Matrix<f64>,
    /// `ω_q φ_i^*(τ_q)` at `(i, q)`.
    time_test: Matrix<f64>,
}

impl SlabSystem<'_> {
    fn nt(&self) -> usize {
        self.mt.rows()
    }

    fn linear(&self, u: &Matrix<f64>) -> Matrix<f64> {
        u.matmul(&self.mass_t).add(&self.mt.matmul(&u.matmul(&self.b_t)))
    }

    /// Nodal values `V(ξ_p, τ_q)` at `(q, p)`.
    fn values(&self, u: &Matrix<f64>) -> Matrix<f64> {
        let mut c = self.time_trial.matmul(u);
        for q in 0..c.rows() {
            for (v, c0) in c.row_mut(q).iter_mut().zip(&self.c0) {
                *v += c0;
            }
        }
        c.matmul(&self.ops.trial_at_nodes.transpose())
    }

    fn project_quadratic(&self, w: &Matrix<f64>) -> Matrix<f64> {
        self.time_test
            .matmul(&w.matmul(&self.ops.quadratic_form.transpose()))
            .scale(self.gamma)
    }

    fn residual(&self, u: &Matrix<f64>) -> (Matrix<f64>, Option<Matrix<f64>>) {
        let mut r = self.linear(u);
        for (x, f) in r.row_mut(0).iter_mut().zip(&self.forcing) {
            *x += f;
        }
        if self.gamma == 0.0 {
            return (r, None);
        }
        let v = self.values(u);
        let sq = Matrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * v[(i, j)]);
        (r.add(&self.project_quadratic(&sq)), Some(v))
    }

    fn jacobian(&self, v: Option<&Matrix<f64>>, d: &Matrix<f64>) -> Matrix<f64> {
        let lin = self.linear(d);
        match v {
            None => lin,
            Some(v) => {
                let dv = self.time_trial.matmul(d).matmul(&self.ops.trial_at_nodes.transpose());
                let w = Matrix::from_fn(v.rows(), v.cols(), |i, j| 2.0 * v[(i, j)] * dv[(i, j)]);
                lin.add(&self.project_quadratic(&w))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct KdvSolution {
    pub domain: Domain,
    pub ops: Arc<KdvOperators>,
    pub time: SpaceTimeSolution,
    pub newton: Vec<NewtonReport>,
}

impl KdvSolution {
    pub fn values(&self, xs: &[f64], t: f64) -> Vec<f64> {
        let series = self.ops.legendre_of(&self.time.evaluate(t));
        xs.iter().map(|&x| series.eval(self.domain.to_reference(x))).collect()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.values(&[x], t)[0]
    }

    pub fn converged(&self) -> bool {
        self.newton.iter().all(|r| r.converged)
    }
}

pub fn solve_kdv(p: &KdvProblem) -> Result<KdvSolution> {
    p.validate()?;
    let ops = Arc::new(kdv_spatial_operators(p.nx)?);
    solve_kdv_with(p, ops)
}

/// [`solve_kdv`] with precomputed spatial operators.
pub fn solve_kdv_with(p: &KdvProblem, ops: Arc<KdvOperators>) -> Result<KdvSolution> {
    p.validate()?;
    if ops.nx != p.nx {
        return Err(Error::DimensionMismatch {
            expected: p.nx,
            actual: ops.nx,
        });
    }
    let (slabs, nt) = p.slab_layout();
    let h = p.horizon / slabs as f64;
    let s = p.domain.half_length();
    let nx = p.nx;
    let mut b = ops.nonlocal.scale(p.sigma * s);
    for i in 0..nx {
        b[(i, i)] += p.epsilon * p.epsilon / s.powi(3);
    }
    let b = b.scale(0.5 * h);
    let precond = QzSolver::new(nt, Some(&ops.mass), &b)?;
    let rule = gauss_rule(2 * nt);
    let mut time_trial = Matrix::zeros(rule.len(), nt);
    let mut time_test = Matrix::zeros(nt, rule.len());
    for (q, (&tau, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        time_trial.row_mut(q).copy_from_slice(&time_basis_values(nt, tau));
        let pv = legendre_values(nt, tau);
        for i in 0..nt {
            time_test[(i, q)] = w * (pv[i] - pv[i + 1]) / (SQRT_2 * (i as f64 + 1.0));
        }
    }
    let mt = mass_matrix_m1::<f64>(nt).to_dense();
    let mut c0 = ops.coefficients_of(|xi| (p.u0)(p.domain.to_physical(xi)));
    let mut out = Vec::with_capacity(slabs);
    let mut reports = Vec::with_capacity(slabs);
    for l in 0..slabs {
        let bc0 = b.mul_vec(&c0);
        let sys = SlabSystem {
            ops: &ops,
            b_t: b.transpose(),
            mass_t: ops.mass.transpose(),
            mt: mt.clone(),
            forcing: bc0.iter().map(|v| SQRT_2 * v).collect(),
            c0: c0.clone(),
            gamma: 0.5 * h * p.alpha / s,
            time_trial: time_trial.clone(),
            time_test: time_test.clone(),
        };
        let (u, report) = newton(&sys, &precond, &p.newton, l)?;
        let slab = Slab {
            t_start: l as f64 * h,
            t_end: if l + 1 == slabs { p.horizon } else { (l + 1) as f64 * h },
            u0: c0,
            coeffs: u,
        };
        c0 = slab.terminal();
        out.push(slab);
        reports.push(report);
    }
    Ok(KdvSolution {
        domain: p.domain,
        ops,
        time: SpaceTimeSolution {
            slabs: out,
            diagnostics: None,
        },
        newton: reports,
    })
}

fn newton(
    sys: &SlabSystem,
    precond: &QzSolver,
    settings: &NewtonSettings,
    slab: usize,
) -> Result<(Matrix<f64>, NewtonReport)> {
    let (nt, nx) = (sys.nt(), sys.ops.nx);
    let mut u = Matrix::zeros(nt, nx);
    let mut gmres_total = 0;
    let mut previous = f64::INFINITY;
    let mut increases = 0;
    let (mut r, mut v) = sys.residual(&u);
    for iteration in 0..=settings.max_iter {
        let norm = r.max_abs();
        if !norm.is_finite() {
            return Err(Error::NewtonDivergence {
                iteration,
                residual: norm,
            });
        }
        debug!("slab {slab} Newton step {iteration}: residual {norm:.3e}");
        if norm < settings.tol {
            return Ok((
                u,
                NewtonReport {
                    slab,
                    iterations: iteration,
                    residual: norm,
                    gmres_iterations: gmres_total,
                    converged: true,
                },
            ));
        }
        if norm > previous {
            increases += 1;
            if increases >= 3 {
                return Err(Error::NewtonDivergence {
                    iteration,
                    residual: norm,
                });
            }
        } else {
            increases = 0;
        }
        previous = norm;
        if iteration == settings.max_iter {
            break;
        }
        let rhs: Vec<f64> = r.as_slice().iter().map(|x| -x).collect();
        let eta = (1e-2 * settings.tol / norm).clamp(1e-12, 1e-3);
        let step = gmres(
            |x| {
                let d = Matrix::from_vec(nt, nx, x.to_vec());
                sys.jacobian(v.as_ref(), &d).as_slice().to_vec()
            },
            |x| precond.solve(&Matrix::from_vec(nt, nx, x.to_vec())).as_slice().to_vec(),
            &rhs,
            GMRES_RESTART,
            eta,
            20 * GMRES_RESTART,
        )?;
        gmres_total += step.iterations;
        u = u.add(&Matrix::from_vec(nt, nx, step.x));
        (r, v) = sys.residual(&u);
    }
    let residual = r.max_abs();
    warn!(
        "slab {slab}: Newton stopped after {} steps at residual {residual:.3e}",
        settings.max_iter
    );
    Ok((
        u,
        NewtonReport {
            slab,
            iterations: settings.max_iter,
            residual,
            gmres_iterations: gmres_total,
            converged: false,
        },
    ))
}
