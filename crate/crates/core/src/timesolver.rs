//! All-at-once spectral time discretisation of `u' + A u = f`.
//!
//! On `t ∈ [-1, 1]` the solution is `u(t) = u_0 + Σ_k Û_k φ_k(t)` with the
//! first-order trial functions `φ_k = (k+1)/√2 (P_k + P_{k+1})`. Testing
//! against the dual functions gives the matrix equation
//!
//! ```text
//! Û + M_t Û Aᵀ = F,    F = f̂ - U_0 Aᵀ,    U_0 = √2 e_1 u_0ᵀ,
//! ```
//!
//! with `f̂_j = (f, φ_j^*)`. Two solvers are provided: diagonalisation of
//! `M_t` (independent shifted solves, parallel) and QZ backward substitution
//! (sequential, stable for large `N_t`). Longer horizons are covered by
//! marching over equal time slabs.

use std::f64::consts::SQRT_2;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::TriDiagonalMatrix;
use crate::error::{Error, Result};
use crate::gbp::{gbp_eval, gbp_zeros, GbpParams};
use crate::ldpg::mass::mass_matrix_m1;
use crate::linalg::{
    cond2_complex, lu_solve_refined, norm2, qz_identity, BlockBacksub, ComplexMatrix, LuFactor, Matrix,
};
use crate::polybasis::{gauss_rule, legendre_values};
use crate::Complex64;

/// Time modes beyond which the diagonalisation solver warns.
pub const DEFAULT_DIAG_CAP: usize = 15;
/// `cond2(E)` above which the diagonalisation solver warns.
pub const ILL_CONDITIONED_E: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Diag,
    Qz,
}

/// Right-hand side `f(t)` returning a vector of spatial size.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> Vec<f64> + Sync);

/// `φ_k(τ)` for `k < nt`.
pub fn time_basis_values(nt: usize, tau: f64) -> Vec<f64> {
    let p = legendre_values(nt, tau);
    (0..nt).map(|k| (k as f64 + 1.0) / SQRT_2 * (p[k] + p[k + 1])).collect()
}

/// `(g, φ_j^*)` for `j < nt`, with `φ_j^* = (P_j - P_{j+1}) / (√2 (j+1))`,
/// by Gauss quadrature with `nt + 8` points. Returns an `nt × n` matrix.
pub fn project_forcing(f: Forcing, nt: usize, n: usize) -> Matrix<f64> {
    let rule = gauss_rule(nt + 8);
    let mut out = Matrix::zeros(nt, n);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(t);
        assert_eq!(v.len(), n, "forcing returned a vector of the wrong size");
        let p = legendre_values(nt, t);
        for j in 0..nt {
            let psi = (p[j] - p[j + 1]) / (SQRT_2 * (j as f64 + 1.0));
            for (o, &vi) in out.row_mut(j).iter_mut().zip(&v) {
                *o += w * psi * vi;
            }
        }
    }
    out
}

/// The assembled system on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct TimeSystem {
    pub a: Matrix<f64>,
    pub u0: Vec<f64>,
    pub nt: usize,
    pub mt: TriDiagonalMatrix<f64>,
    /// Right-hand side `F` (`N_t × N_x`).
    pub rhs: Matrix<f64>,
}

pub fn assemble(a: &Matrix<f64>, f: Option<Forcing>, u0: &[f64], nt: usize) -> Result<TimeSystem> {
    if nt == 0 {
        return Err(Error::InvalidParameter("N_t must be at least 1".into()));
    }
    if !a.is_square() || a.rows() != u0.len() {
        return Err(Error::DimensionMismatch {
            expected: u0.len(),
            actual: a.rows(),
        });
    }
    let nx = u0.len();
    let mut rhs = match f {
        Some(f) => project_forcing(f, nt, nx),
        None => Matrix::zeros(nt, nx),
    };
    let au0 = a.mul_vec(u0);
    for (r, v) in rhs.row_mut(0).iter_mut().zip(&au0) {
        *r -= SQRT_2 * v;
    }
    Ok(TimeSystem {
        a: a.clone(),
        u0: u0.to_vec(),
        nt,
        mt: mass_matrix_m1(nt),
        rhs,
    })
}

impl TimeSystem {
    /// `‖Û + M_t Û Aᵀ - F‖∞` (max absolute entry).
    pub fn residual(&self, u: &Matrix<f64>) -> f64 {
        let uat = u.matmul(&self.a.transpose());
        let mut worst = 0.0f64;
        for j in 0..self.nt {
            for x in 0..self.u0.len() {
                let mut v = u[(j, x)] - self.rhs[(j, x)];
                for k in j.saturating_sub(1)..(j + 2).min(self.nt) {
                    v += self.mt.get(j, k) * uat[(k, x)];
                }
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// `u(τ)` for `τ ∈ [-1, 1]`.
    pub fn evaluate(&self, u: &Matrix<f64>, tau: f64) -> Vec<f64> {
        evaluate_slab(&self.u0, u, tau)
    }
}

fn evaluate_slab(u0: &[f64], u: &Matrix<f64>, tau: f64) -> Vec<f64> {
    let phi = time_basis_values(u.rows(), tau);
    let mut out = u0.to_vec();
    for (k, &p) in phi.iter().enumerate() {
        for (o, &c) in out.iter_mut().zip(u.row(k)) {
            *o += p * c;
        }
    }
    out
}

/// Diagnostics of the diagonalisation solver.
#[derive(Debug, Clone, Serialize)]
pub struct DiagDiagnostics {
    pub cond2_e: f64,
    pub beyond_cap: bool,
    pub ill_conditioned: bool,
}

/// Eigen-decomposition of `M_t` from the zeros of `B_{N_t}^{(3)}`, with the
/// shifted spatial operators `I + λ_j A` factorised.
#[derive(Debug, Clone)]
pub struct DiagSolver {
    lambda: Vec<Complex64>,
    e: ComplexMatrix,
    e_lu: LuFactor<Complex64>,
    /// `partner[j] = Some(k)` when `λ_k = conj(λ_j)` and row `k` is taken
    /// as the conjugate of row `j`.
    partner: Vec<Option<usize>>,
    /// `None` for rows obtained by conjugation.
    shifted: Vec<Option<LuFactor<Complex64>>>,
    pub diagnostics: DiagDiagnostics,
}

impl DiagSolver {
    pub fn new(nt: usize, a: &Matrix<f64>) -> Result<Self> {
        Self::with_cap(nt, a, DEFAULT_DIAG_CAP)
    }

    pub fn with_cap(nt: usize, a: &Matrix<f64>, cap: usize) -> Result<Self> {
        if nt == 0 {
            return Err(Error::InvalidParameter("N_t must be at least 1".into()));
        }
        let beyond_cap = nt > cap;
        if beyond_cap {
            warn!("diagonalisation with N_t = {nt} exceeds the stable range (cap {cap})");
        }
        let zeros = gbp_zeros(nt, 3.0, 1e-13)?.zeros;
        let lambda: Vec<Complex64> = zeros.iter().map(|z| -z).collect();
        let params = GbpParams::standard(nt, 3.0)?;
        let mut e = ComplexMatrix::zeros(nt, nt);
        for (j, &z) in zeros.iter().enumerate() {
            let mut col = gbp_eval(&params, z)?;
            col.truncate(nt);
            let norm = norm2(&col);
            let col: Vec<Complex64> = col.iter().map(|v| v / norm).collect();
            e.set_column(j, &col);
        }
        let cond2_e = cond2_complex(&e).unwrap_or(f64::INFINITY);
        let ill_conditioned = cond2_e > ILL_CONDITIONED_E;
        if ill_conditioned {
            warn!("eigenvector matrix of the time mass matrix is ill-conditioned: cond2 = {cond2_e:.3e}");
        }
        // E is ill-conditioned by nature; accept any non-zero pivot.
        let e_lu = LuFactor::with_threshold(&e, 0.0).map_err(|_| Error::IllConditioned { estimate: cond2_e })?;

        let scale = lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let mut partner = vec![None; nt];
        let mut solved = vec![true; nt];
        for j in 0..nt {
            if !solved[j] || lambda[j].im.abs() <= 1e-12 * scale {
                continue;
            }
            let target = lambda[j].conj();
            let k = (0..nt)
                .filter(|&k| k != j && solved[k] && partner[k].is_none())
                .min_by(|&x, &y| (lambda[x] - target).norm().total_cmp(&(lambda[y] - target).norm()));
            if let Some(k) = k {
                if (lambda[k] - target).norm() <= 1e-8 * scale {
                    partner[j] = Some(k);
                    solved[k] = false;
                }
            }
        }
        let ac = a.to_complex();
        let shifted = (0..nt)
            .into_par_iter()
            .map(|j| {
                if !solved[j] {
                    return Ok(None);
                }
                let mut op = ac.scale(lambda[j]);
                for i in 0..op.rows() {
                    op[(i, i)] += Complex64::new(1.0, 0.0);
                }
                LuFactor::new(&op).map(Some).map_err(|_| Error::Resonance { index: j })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda,
            e,
            e_lu,
            partner,
            shifted,
            diagnostics: DiagDiagnostics {
                cond2_e,
                beyond_cap,
                ill_conditioned,
            },
        })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.lambda
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.e
    }

    /// Solves `Û + M_t Û Aᵀ = F`.
    pub fn solve(&self, f: &Matrix<f64>) -> Matrix<f64> {
        let nt = self.lambda.len();
        let nx = f.cols();
        let mut g = lu_solve_refined(&self.e_lu, &self.e, &f.to_complex(), 2);
        // Conjugating the computed solution of E G = F gives another solution
        // with an equally small residual; averaging the two keeps that
        // residual while making conjugate rows consistent. Taking one row of
        // a pair from the unsymmetrised G would not.
        for (j, k) in self.partner.iter().enumerate().filter_map(|(j, k)| k.map(|k| (j, k))) {
            for x in 0..nx {
                g[(j, x)] = 0.5 * (g[(j, x)] + g[(k, x)].conj());
            }
        }
        let rows: Vec<Option<Vec<Complex64>>> = (0..nt)
            .into_par_iter()
            .map(|j| self.shifted[j].as_ref().map(|lu| lu.solve_vec(g.row(j))))
            .collect();
        let mut w = ComplexMatrix::zeros(nt, nx);
        for (j, row) in rows.into_iter().enumerate() {
            if let Some(row) = row {
                w.row_mut(j).copy_from_slice(&row);
                if let Some(k) = self.partner[j] {
                    let conj: Vec<Complex64> = row.iter().map(|v| v.conj()).collect();
                    w.row_mut(k).copy_from_slice(&conj);
                }
            }
        }
        self.e.matmul(&w).re()
    }
}

/// QZ factorisation of `(I, M_t)` with the block backward substitution for
/// `Û Cᵀ + M_t Û Aᵀ = F` prepared (`C = I` when absent).
#[derive(Debug, Clone)]
pub struct QzSolver {
    q: ComplexMatrix,
    z: ComplexMatrix,
    backsub: BlockBacksub,
}

impl QzSolver {
    pub fn new(nt: usize, c: Option<&Matrix<f64>>, a: &Matrix<f64>) -> Result<Self> {
        if nt == 0 {
            return Err(Error::InvalidParameter("N_t must be at least 1".into()));
        }
        let qz = qz_identity(&mass_matrix_m1::<f64>(nt).to_dense())?;
        let c = c.map(Matrix::to_complex);
        let minus_a = a.to_complex().scale(Complex64::new(-1.0, 0.0));
        let backsub = BlockBacksub::new(&qz.s, &qz.t, c.as_ref(), &minus_a)?;
        Ok(Self {
            q: qz.q,
            z: qz.z,
            backsub,
        })
    }

    pub fn solve(&self, f: &Matrix<f64>) -> Matrix<f64> {
        self.solve_complex(&f.to_complex()).re()
    }

    pub fn solve_complex(&self, f: &ComplexMatrix) -> ComplexMatrix {
        let w = self.backsub.solve(&self.q.matmul(f));
        self.z.matmul(&w)
    }
}

pub fn solve_diag(sys: &TimeSystem) -> Result<(Matrix<f64>, DiagDiagnostics)> {
    let solver = DiagSolver::new(sys.nt, &sys.a)?;
    Ok((solver.solve(&sys.rhs), solver.diagnostics.clone()))
}

pub fn solve_qz(sys: &TimeSystem) -> Result<Matrix<f64>> {
    Ok(QzSolver::new(sys.nt, None, &sys.a)?.solve(&sys.rhs))
}

/// `[0, T]` split into `L` equal slabs with `N_t` modes each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGrid {
    pub horizon: f64,
    pub slabs: usize,
    pub nt: usize,
}

impl SlabGrid {
    pub fn new(horizon: f64, slabs: usize, nt: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if slabs == 0 || nt == 0 {
            return Err(Error::InvalidParameter("L and N_t must be at least 1".into()));
        }
        Ok(Self { horizon, slabs, nt })
    }

    pub fn slab_length(&self) -> f64 {
        self.horizon / self.slabs as f64
    }
}

/// Coefficients of one slab `[t_start, t_end]`.
#[derive(Debug, Clone)]
pub struct Slab {
    pub t_start: f64,
    pub t_end: f64,
    pub u0: Vec<f64>,
    pub coeffs: Matrix<f64>,
}

impl Slab {
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let tau = 2.0 * (t - self.t_start) / (self.t_end - self.t_start) - 1.0;
        evaluate_slab(&self.u0, &self.coeffs, tau.clamp(-1.0, 1.0))
    }

    pub fn terminal(&self) -> Vec<f64> {
        evaluate_slab(&self.u0, &self.coeffs, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SpaceTimeSolution {
    pub slabs: Vec<Slab>,
    pub diagnostics: Option<DiagDiagnostics>,
}

impl SpaceTimeSolution {
    /// Spatial coefficient vector at time `t ∈ [0, T]`.
    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let idx = self
            .slabs
            .iter()
            .position(|s| t <= s.t_end)
            .unwrap_or(self.slabs.len() - 1);
        self.slabs[idx].evaluate(t)
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.slabs.last().expect("at least one slab").terminal()
    }

    pub fn horizon(&self) -> f64 {
        self.slabs.last().map_or(0.0, |s| s.t_end)
    }
}

enum Prepared {
    Diag(DiagSolver),
    Qz(QzSolver),
}

/// Sequential slab marching of `u' + A u = f(t)` on `[0, T]`.
///
/// On a slab of length `h` the equation is mapped to `[-1, 1]`, which
/// scales `A` and `f` by `h/2`. Slab `k` starts from the terminal value of
/// slab `k-1`.
pub fn march(
    grid: &SlabGrid,
    a: &Matrix<f64>,
    f: Option<Forcing>,
    u0: &[f64],
    strategy: Strategy,
) -> Result<SpaceTimeSolution> {
    if !a.is_square() || a.rows() != u0.len() {
        return Err(Error::DimensionMismatch {
            expected: u0.len(),
            actual: a.rows(),
        });
    }
    let h = grid.slab_length();
    let half = 0.5 * h;
    let a_slab = a.scale(half);
    let prepared = match strategy {
        Strategy::Diag => Prepared::Diag(DiagSolver::new(grid.nt, &a_slab)?),
        Strategy::Qz => Prepared::Qz(QzSolver::new(grid.nt, None, &a_slab)?),
    };
    let nx = u0.len();
    let mut slabs = Vec::with_capacity(grid.slabs);
    let mut start = u0.to_vec();
    for l in 0..grid.slabs {
        let t_start = l as f64 * h;
        let t_end = if l + 1 == grid.slabs {
            grid.horizon
        } else {
            (l + 1) as f64 * h
        };
        let mut rhs = match f {
            Some(f) => {
                let local = move |tau: f64| -> Vec<f64> {
                    f(t_start + (tau + 1.0) * half).into_iter().map(|v| v * half).collect()
                };
                project_forcing(&local, grid.nt, nx)
            }
            None => Matrix::zeros(grid.nt, nx),
        };
        let au0 = a_slab.mul_vec(&start);
        for (r, v) in rhs.row_mut(0).iter_mut().zip(&au0) {
            *r -= SQRT_2 * v;
        }
        let coeffs = match &prepared {
            Prepared::Diag(s) => s.solve(&rhs),
            Prepared::Qz(s) => s.solve(&rhs),
        };
        if !coeffs.is_finite() {
            return Err(Error::NonConvergence {
                what: "time slab",
                iterations: l,
                best_residual: f64::INFINITY,
            });
        }
        let slab = Slab {
            t_start,
            t_end,
            u0: start,
            coeffs,
        };
        start = slab.terminal();
        slabs.push(slab);
    }
    Ok(SpaceTimeSolution {
        slabs,
        diagnostics: match prepared {
            Prepared::Diag(s) => Some(s.diagnostics),
            Prepared::Qz(_) => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix<f64> {
        Matrix::from_rows(&[vec![v]])
    }

    fn max_error_on_reference(sys: &TimeSystem, u: &Matrix<f64>) -> f64 {
        (0..101)
            .map(|i| {
                let t = -1.0 + 0.02 * i as f64;
                (sys.evaluate(u, t)[0] - (-(t + 1.0)).exp()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn basis_endpoint_values() {
        let v = time_basis_values(5, 1.0);
        for (k, x) in v.iter().enumerate() {
            assert!((x - SQRT_2 * (k as f64 + 1.0)).abs() < 1e-13);
        }
        assert!(time_basis_values(5, -1.0).iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let sys = assemble(&scalar(2.0), None, &[0.0], 6).unwrap();
        assert_eq!(sys.rhs.max_abs(), 0.0);
    }

    #[test]
    fn polynomial_forcing_is_projected_exactly() {
        // f = t² against φ_0^* = (1 - t)/√2: ∫ t²(1-t)/√2 = (2/3)/√2.
        let f = |t: f64| vec![t * t];
        let p = project_forcing(&f, 4, 1);
        assert!((p[(0, 0)] - 2.0 / 3.0 / SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn scalar_decay_both_strategies() {
        let sys = assemble(&scalar(1.0), None, &[1.0], 12).unwrap();
        let (ud, diag) = solve_diag(&sys).unwrap();
        let uq = solve_qz(&sys).unwrap();
        assert!(max_error_on_reference(&sys, &ud) < 1e-10);
        assert!(max_error_on_reference(&sys, &uq) < 1e-10);
        assert!(sys.residual(&ud) < 1e-9);
        assert!(sys.residual(&uq) < 1e-12);
        assert!(diag.cond2_e > 1.0);
        let sys10 = assemble(&scalar(1.0), None, &[1.0], 10).unwrap();
        let d = solve_diag(&sys10).unwrap().0;
        let q = solve_qz(&sys10).unwrap();
        assert!(d.sub(&q).max_abs() < 1e-8);
    }

    #[test]
    fn single_mode() {
        let sys = assemble(&scalar(1.0), None, &[1.0], 1).unwrap();
        // (1 + 2/3) u = -√2.
        let want = -SQRT_2 / (1.0 + 2.0 / 3.0);
        assert!((solve_diag(&sys).unwrap().0[(0, 0)] - want).abs() < 1e-14);
        assert!((solve_qz(&sys).unwrap()[(0, 0)] - want).abs() < 1e-14);
    }

    #[test]
    fn many_modes_qz_stays_accurate() {
        let sys = assemble(&scalar(1.0), None, &[1.0], 200).unwrap();
        let u = solve_qz(&sys).unwrap();
        assert!(max_error_on_reference(&sys, &u) < 1e-12);
    }

    #[test]
    fn forced_problem() {
        // u' + 2u = cos t, u(-1) = 0.
        let exact = |t: f64| {
            let part = |s: f64| (2.0 * s.cos() + s.sin()) / 5.0;
            part(t) - part(-1.0) * (-2.0 * (t + 1.0)).exp()
        };
        let f = |t: f64| vec![t.cos()];
        let sys = assemble(&scalar(2.0), Some(&f), &[0.0], 20).unwrap();
        let u = solve_qz(&sys).unwrap();
        for t in [-0.5, 0.0, 0.7, 1.0] {
            assert!((sys.evaluate(&u, t)[0] - exact(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn marching_matches_single_domain() {
        let a = scalar(1.0);
        let one = march(&SlabGrid::new(2.0, 1, 100).unwrap(), &a, None, &[1.0], Strategy::Qz).unwrap();
        let ten = march(&SlabGrid::new(2.0, 10, 10).unwrap(), &a, None, &[1.0], Strategy::Qz).unwrap();
        for t in [0.1, 0.55, 1.3, 2.0] {
            assert!((one.evaluate(t)[0] - ten.evaluate(t)[0]).abs() < 1e-8);
            assert!((ten.evaluate(t)[0] - (-t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn strategies_agree_on_system() {
        let a = Matrix::from_rows(&[vec![1.0, 0.5], vec![-0.5, 2.0]]);
        let sys = assemble(&a, None, &[1.0, -1.0], 12).unwrap();
        let d = solve_diag(&sys).unwrap().0;
        let q = solve_qz(&sys).unwrap();
        assert!(d.sub(&q).max_abs() <= 1e-8 * q.max_abs());
    }
}
