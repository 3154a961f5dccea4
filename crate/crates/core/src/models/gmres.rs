//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};
use crate::linalg::norm2;

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Solves `A x = b` with `A x` given by `apply` and the preconditioner
/// `M⁻¹ v` by `precond`, iterating on `A M⁻¹ y = b`, `x = M⁻¹ y`.
///
/// Stops when `‖b - A x‖ ≤ tol ‖b‖`. Returns [`Error::GmresStagnation`]
/// when a whole restart cycle reduces the residual by less than 0.1% or
/// `max_iter` iterations are exhausted.
pub fn gmres<A, P>(apply: A, precond: P, b: &[f64], restart: usize, tol: f64, max_iter: usize) -> Result<GmresOutcome>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let restart = restart.max(1);
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut iterations = 0;
    let mut r = b.to_vec();
    loop {
        let beta = norm2(&r);
        if beta <= tol * bnorm {
            return Ok(GmresOutcome {
                x,
                iterations,
                relative_residual: beta / bnorm,
            });
        }
        if iterations >= max_iter {
            return Err(Error::GmresStagnation {
                relative_residual: beta / bnorm,
            });
        }
        let cycle_start = beta;
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
        // Hessenberg columns after rotation (upper triangular R).
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut rotations: Vec<(f64, f64)> = Vec::with_capacity(restart);
        let mut g = vec![beta];
        for j in 0..restart {
            iterations += 1;
            let zj = precond(&v[j]);
            let mut w = apply(&zj);
            z.push(zj);
            let mut col = Vec::with_capacity(j + 2);
            for vi in &v {
                let hij = dot(&w, vi);
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
                col.push(hij);
            }
            let hnext = norm2(&w);
            col.push(hnext);
            for (i, &(c, s)) in rotations.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col.pop();
            rotations.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            h.push(col);
            let done = g[j + 1].abs() <= tol * bnorm || hnext == 0.0 || iterations >= max_iter;
            if !done {
                v.push(w.into_iter().map(|x| x / hnext).collect());
            }
            if done || j + 1 == restart {
                break;
            }
        }
        // Back substitution R y = g.
        let k = h.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (l, yl) in y.iter().enumerate().skip(i + 1) {
                s -= h[l][i] * yl;
            }
            y[i] = s / h[i][i];
        }
        for (zi, yi) in z.iter().zip(&y) {
            for (xk, zk) in x.iter_mut().zip(zi) {
                *xk += yi * zk;
            }
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let after = norm2(&r);
        if after > tol * bnorm && after > (1.0 - 1e-3) * cycle_start {
            return Err(Error::GmresStagnation {
                relative_residual: after / bnorm,
            });
        }
    }
}
