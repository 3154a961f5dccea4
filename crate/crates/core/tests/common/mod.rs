//! Reference computations shared by the integration tests. Nothing here
//! calls into the crate, so each helper is an independent check.

#![allow(dead_code)]

use num_complex::Complex64;

/// `P_0(x), ..., P_n(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![1.0, x];
    for k in 1..n {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p.truncate(n + 1);
    p
}

/// Gauss-Legendre nodes and weights by Newton iteration from Chebyshev
/// guesses.
pub fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let p = legendre(n, x);
            dp = n as f64 * (x * p[n] - p[n - 1]) / (x * x - 1.0);
            let dx = p[n] / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Coefficients (ascending) of `B_n^{(α)}` with `β = 2`:
/// `Σ_k C(n,k) (n+α-1)_k (z/2)^k`, `(q)_k` the rising factorial.
pub fn bessel_coeffs(n: usize, alpha: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(n + 1);
    let mut binom = 1.0;
    let mut rising = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n + 1 - k) as f64 / k as f64;
            rising *= n as f64 + alpha - 1.0 + (k - 1) as f64;
        }
        c.push(binom * rising / 2f64.powi(k as i32));
    }
    c
}

pub fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// All roots of a real polynomial by Durand-Kerner iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<f64> = c.iter().map(|a| a / lead).collect();
    let radius = 1.0 + monic[..n].iter().map(|a| a.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius.min(2.0)).collect();
    for _ in 0..5000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = horner(&monic, z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Maximum distance between two spectra matched greedily by nearest
/// neighbour.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Roots of `λ² - tr λ + det` for a 2×2 matrix.
pub fn eig2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

/// `(φ_k, ψ_j)` and `(φ_k', ψ_j)` for `φ_k = P_k + P_{k+1}`,
/// `ψ_j = P_j - P_{j+1}`, by Gauss quadrature.
pub fn first_order_pencil(n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (x, w) = gauss(n + 4);
    let mut mass = vec![vec![0.0; n]; n];
    let mut stiff = vec![vec![0.0; n]; n];
    for (&t, &wt) in x.iter().zip(&w) {
        let p = legendre(n + 1, t);
        // P_k'(t) from (1 - t²) P_k' = k (P_{k-1} - t P_k).
        let dp: Vec<f64> = (0..=n + 1)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    k as f64 * (p[k - 1] - t * p[k]) / (1.0 - t * t)
                }
            })
            .collect();
        for j in 0..n {
            let psi = p[j] - p[j + 1];
            for k in 0..n {
                mass[j][k] += wt * (p[k] + p[k + 1]) * psi;
                stiff[j][k] += wt * (dp[k] + dp[k + 1]) * psi;
            }
        }
    }
    (mass, stiff)
}

/// `max |a - b|` over matching entries of two grids of values.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// Travelling sech² wave `3c sech²(√c (x - c t - x₀)/2)` with `c = 1/3`,
/// `x₀ = -5`; solves `u_t + u u_x + u_xxx = 0`.
pub fn kdv_soliton(x: f64, t: f64) -> f64 {
    let c: f64 = 1.0 / 3.0;
    let y = c.sqrt() * (x - c * t + 5.0) / 2.0;
    3.0 * c / y.cosh().powi(2)
}
