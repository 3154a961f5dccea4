//! Legendre polynomials: evaluation, endpoint values, Gauss and
//! Gauss-Lobatto quadrature, and calculus on coefficient vectors.

use crate::error::{Error, Result};

/// Values `P_0(x), ..., P_n(x)` from the three-term recurrence.
pub fn eval_legendre(n: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() || x.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain { value: x });
    }
    Ok(legendre_values(n, x))
}

/// Recurrence without the domain check; used internally by the quadrature
/// Newton iterations and by evaluators that already validated `x`.
pub(crate) fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
        p.push(next);
    }
    p
}

/// `(P_n(x), P_n'(x))` for a single degree.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Endpoint values `(P_n(1), P_n(-1), P_n'(1), P_n'(-1))`.
pub fn special_values(n: usize) -> (f64, f64, f64, f64) {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let nf = n as f64;
    let d = 0.5 * nf * (nf + 1.0);
    (1.0, sign, d, -sign * d)
}

/// `P_n^{(l)}(±1)` as an exact rational `(numerator, denominator)` pair.
///
/// `P_n^{(l)}(1) = (n+l)! / ((n-l)! 2^l l!)` and the value at `-1` carries
/// the sign `(-1)^{n+l}`.
pub fn endpoint_derivative(n: usize, l: usize, at_plus_one: bool) -> (i128, i128) {
    if l > n {
        return (0, 1);
    }
    let mut num: i128 = 1;
    for i in (n - l + 1)..=(n + l) {
        num *= i as i128;
    }
    let mut den: i128 = 1 << l;
    for i in 2..=l {
        den *= i as i128;
    }
    let g = gcd(num, den);
    let (num, den) = (num / g, den / g);
    let negative = !at_plus_one && (n + l) % 2 == 1;
    (if negative { -num } else { num }, den)
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Gauss,
    GaussLobatto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(t_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

const NODE_TOL: f64 = 1e-15;
const NODE_MAX_ITER: usize = 100;

/// Gauss or Gauss-Lobatto rule with `npoints` nodes on `[-1, 1]`.
pub fn quadrature(kind: QuadratureKind, npoints: usize) -> Result<QuadratureRule> {
    match kind {
        QuadratureKind::Gauss => gauss(npoints),
        QuadratureKind::GaussLobatto => lobatto(npoints),
    }
}

/// Shorthand for the Gauss rule, which is what most assembly code needs.
pub fn gauss_rule(npoints: usize) -> QuadratureRule {
    gauss(npoints.max(1)).expect("Gauss node iteration converges for all supported sizes")
}

fn gauss(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs at least one point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    // Nodes are symmetric; compute the non-negative half and mirror.
    for i in 0..n.div_ceil(2) {
        // i-th largest zero, Chebyshev-angle guess with the usual correction.
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = theta.cos() * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut converged = false;
        let mut dp = 1.0;
        for _ in 0..NODE_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            dp = d;
            if dx.abs() <= NODE_TOL * x.abs().max(1.0) {
                converged = true;
                dp = legendre_with_derivative(n, x).1;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "Gauss node Newton iteration",
                iterations: NODE_MAX_ITER,
                best_residual: legendre_with_derivative(n, x).0.abs(),
            });
        }
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
            dp = legendre_with_derivative(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    Ok(QuadratureRule {
        kind: QuadratureKind::Gauss,
        nodes,
        weights,
    })
}

fn lobatto(n: usize) -> Result<QuadratureRule> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "Gauss-Lobatto rule needs at least two points".into(),
        ));
    }
    let m = n - 1; // interior nodes are zeros of P'_m
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[n - 1] = 1.0;
    let interior = n - 2;
    for i in 0..interior.div_ceil(2) {
        // Chebyshev-Gauss-Lobatto guess, descending order.
        let mut x = (std::f64::consts::PI * (i as f64 + 1.0) / m as f64).cos();
        let mut converged = false;
        for _ in 0..NODE_MAX_ITER {
            // Newton on q = P'_m using q' = (2x q - m(m+1) P_m)/(1-x^2).
            let (p, d) = legendre_with_derivative(m, x);
            let dd = (2.0 * x * d - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = d / dd;
            x -= dx;
            if dx.abs() <= NODE_TOL * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "Gauss-Lobatto node Newton iteration",
                iterations: NODE_MAX_ITER,
                best_residual: legendre_with_derivative(m, x).1.abs(),
            });
        }
        if interior % 2 == 1 && i == interior / 2 {
            x = 0.0;
        }
        nodes[n - 2 - i] = x;
        nodes[1 + i] = -x;
    }
    let weights = nodes
        .iter()
        .map(|&t| {
            let p = legendre_with_derivative(m, t).0;
            2.0 / (nf * (nf - 1.0) * p * p)
        })
        .collect();
    Ok(QuadratureRule {
        kind: QuadratureKind::GaussLobatto,
        nodes,
        weights,
    })
}

/// Polynomial stored by its Legendre coefficients `c_0..c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSeries {
    pub coeffs: Vec<f64>,
}

impl LegendreSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Clenshaw summation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.coeffs.len();
        if n == 0 {
            return 0.0;
        }
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for k in (1..n).rev() {
            let kf = k as f64;
            let alpha = (2.0 * kf + 1.0) / (kf + 1.0) * x;
            let beta = (kf + 1.0) / (kf + 2.0);
            let b0 = self.coeffs[k] + alpha * b1 - beta * b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - 0.5 * b2
    }

    /// Coefficients of the derivative (one degree lower).
    pub fn derivative(&self) -> LegendreSeries {
        LegendreSeries::new(derivative_coeffs(&self.coeffs))
    }

    /// Primitive equal to `½(∫_{-1}^x - ∫_x^1)` of the series.
    pub fn antiderivative(&self) -> LegendreSeries {
        antiderivative(self)
    }
}

pub(crate) fn derivative_coeffs(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    // d_k = (2k+1) Σ_{j>k, j-k odd} c_j, accumulated backwards.
    let mut d = vec![0.0; n - 1];
    let mut odd = 0.0; // sum over j ≡ k+1 (mod 2)
    let mut even = 0.0;
    for k in (0..n - 1).rev() {
        if (k + 1) % 2 == 0 {
            even += c[k + 1];
        } else {
            odd += c[k + 1];
        }
        let s = if k % 2 == 0 { odd } else { even };
        d[k] = (2 * k + 1) as f64 * s;
    }
    d
}

/// Term-wise primitive built from `P_n = (P_{n+1} - P_{n-1})' / (2n+1)`.
///
/// The symmetric primitive `½(∫_{-1}^x f - ∫_x^1 f)` is the unique primitive
/// with `V(1) + V(-1) = 0`. The term-wise formula already has that property:
/// `P_{n+1} - P_{n-1}` vanishes at both endpoints and `P_0 ↦ P_1` is odd.
pub fn antiderivative(series: &LegendreSeries) -> LegendreSeries {
    let c = &series.coeffs;
    let n = c.len();
    let mut out = vec![0.0; n + 1];
    for (k, &ck) in c.iter().enumerate() {
        if k == 0 {
            out[1] += ck;
        } else {
            let s = ck / (2 * k + 1) as f64;
            out[k + 1] += s;
            out[k - 1] -= s;
        }
    }
    LegendreSeries::new(out)
}

/// Legendre coefficients of `f` up to degree `n` by Gauss quadrature on
/// `n + 16` points.
pub fn project<F: Fn(f64) -> f64>(f: F, n: usize) -> LegendreSeries {
    let rule = gauss_rule(n + 16);
    let values: Vec<f64> = rule.nodes.iter().map(|&t| f(t)).collect();
    project_values(&rule, &values, n)
}

/// Projection from precomputed samples on the nodes of `rule`.
pub(crate) fn project_values(rule: &QuadratureRule, values: &[f64], n: usize) -> LegendreSeries {
    let mut coeffs = vec![0.0; n + 1];
    for ((&t, &w), &v) in rule.nodes.iter().zip(&rule.weights).zip(values) {
        let p = legendre_values(n, t);
        for k in 0..=n {
            coeffs[k] += w * v * p[k];
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * k + 1) as f64 / 2.0;
    }
    LegendreSeries::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(eval_legendre(2, 1.0).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(eval_legendre(2, 0.0).unwrap(), vec![1.0, 0.0, -0.5]);
        assert_eq!(eval_legendre(3, -1.0).unwrap(), vec![1.0, -1.0, 1.0, -1.0]);
        assert!(matches!(eval_legendre(3, 1.1), Err(Error::Domain { .. })));
        assert!(eval_legendre(3, 1.0 + 1e-13).is_ok());
    }

    #[test]
    fn special_value_examples() {
        assert_eq!(special_values(0), (1.0, 1.0, 0.0, 0.0));
        assert_eq!(special_values(2), (1.0, 1.0, 3.0, -3.0));
        assert_eq!(special_values(3), (1.0, -1.0, 6.0, 6.0));
    }

    #[test]
    fn endpoint_derivatives_match_special_values() {
        for n in 0..12 {
            let (_, _, dp, dm) = special_values(n);
            let (a, b) = endpoint_derivative(n, 1, true);
            assert_eq!(a as f64 / b as f64, dp);
            let (a, b) = endpoint_derivative(n, 1, false);
            assert_eq!(a as f64 / b as f64, dm);
        }
        // P_3'' = 15x, so P_3''(1) = 15 and P_3''(-1) = -15.
        assert_eq!(endpoint_derivative(3, 2, true), (15, 1));
        assert_eq!(endpoint_derivative(3, 2, false), (-15, 1));
    }

    #[test]
    fn closed_form_rules() {
        let g3 = quadrature(QuadratureKind::Gauss, 3).unwrap();
        let r = (0.6f64).sqrt();
        for (a, b) in g3.nodes.iter().zip([-r, 0.0, r]) {
            assert!(close(*a, b, 1e-15));
        }
        for (a, b) in g3.weights.iter().zip([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0]) {
            assert!(close(*a, b, 1e-15));
        }
        let l3 = quadrature(QuadratureKind::GaussLobatto, 3).unwrap();
        assert_eq!(l3.nodes, vec![-1.0, 0.0, 1.0]);
        for (a, b) in l3.weights.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert!(close(*a, b, 1e-15));
        }
        let g2 = quadrature(QuadratureKind::Gauss, 2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!(close(g2.nodes[0], -s, 1e-15) && close(g2.nodes[1], s, 1e-15));
        assert!(close(g2.weights[0], 1.0, 1e-15) && close(g2.weights[1], 1.0, 1e-15));
    }

    #[test]
    fn rule_sizes_are_rejected_below_minimum() {
        assert!(quadrature(QuadratureKind::Gauss, 0).is_err());
        assert!(quadrature(QuadratureKind::GaussLobatto, 1).is_err());
    }

    #[test]
    fn antiderivative_examples() {
        let v = antiderivative(&LegendreSeries::new(vec![0.0, 1.0]));
        assert!(close(v.coeffs[0], -1.0 / 3.0, 1e-15));
        assert!(close(v.coeffs[1], 0.0, 1e-15));
        assert!(close(v.coeffs[2], 1.0 / 3.0, 1e-15));
        let v = antiderivative(&LegendreSeries::new(vec![1.0]));
        assert_eq!(v.coeffs, vec![0.0, 1.0]);
        let v = antiderivative(&LegendreSeries::new(vec![0.0, 0.0, 1.0]));
        assert!(close(v.coeffs[3], 0.2, 1e-15) && close(v.coeffs[1], -0.2, 1e-15));
    }

    #[test]
    fn projection_examples() {
        let c = project(|_| 1.0, 2).coeffs;
        assert!(close(c[0], 1.0, 1e-14) && c[1].abs() < 1e-14 && c[2].abs() < 1e-14);
        let c = project(|x| x * x, 2).coeffs;
        assert!(close(c[0], 1.0 / 3.0, 1e-14) && c[1].abs() < 1e-14);
        assert!(close(c[2], 2.0 / 3.0, 1e-14));
    }

    #[test]
    fn clenshaw_matches_recurrence() {
        let s = LegendreSeries::new(vec![0.3, -1.2, 0.7, 2.0, -0.25]);
        for &x in &[-1.0, -0.3, 0.0, 0.45, 1.0] {
            let p = legendre_values(4, x);
            let direct: f64 = s.coeffs.iter().zip(&p).map(|(c, p)| c * p).sum();
            assert!(close(s.eval(x), direct, 1e-14));
        }
    }

    #[test]
    fn derivative_of_p3() {
        // P_3' = 5 P_2 + P_0
        let d = LegendreSeries::new(vec![0.0, 0.0, 0.0, 1.0]).derivative();
        assert_eq!(d.coeffs, vec![1.0, 0.0, 5.0]);
    }
}
