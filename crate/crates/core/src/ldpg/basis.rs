//! Compact trial/test bases built from consecutive Legendre polynomials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::polybasis::{endpoint_derivative, LegendreSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Homogeneous conditions at `t = -1`.
    Trial,
    /// Homogeneous conditions at `t = +1`.
    Test,
}

/// `scale · Σ_i combo[i] P_{k+i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactBasis {
    pub order: usize,
    pub side: Side,
    pub k: usize,
    pub combo: Vec<f64>,
    pub scale: f64,
}

impl CompactBasis {
    /// Full Legendre coefficient vector (length `k + combo.len()`).
    pub fn legendre(&self) -> LegendreSeries {
        let mut c = vec![0.0; self.k + self.combo.len()];
        for (i, &w) in self.combo.iter().enumerate() {
            c[self.k + i] = self.scale * w;
        }
        LegendreSeries::new(c)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.legendre().eval(t)
    }
}

/// Closed-form dual bases of order `m ∈ {1, 2, 3}`.
///
/// The scalings make the `m`-th derivative Petrov matrix
/// `[(φ_k^{(m)}, ψ_j)]` the identity.
pub fn compact_basis(m: usize, side: Side, k: usize) -> Result<CompactBasis> {
    let kf = k as f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    let s = if side == Side::Trial { 1.0 } else { -1.0 };
    let (combo, scale) = match m {
        1 => {
            let scale = match side {
                Side::Trial => (kf + 1.0) / sqrt2,
                Side::Test => 1.0 / (sqrt2 * (kf + 1.0)),
            };
            (vec![1.0, s], scale)
        }
        2 => {
            let a = (2.0 * kf + 3.0) / (kf + 2.0);
            let b = (kf + 1.0) / (kf + 2.0);
            let scale = match side {
                Side::Trial => (kf + 2.0) / sqrt2,
                Side::Test => 1.0 / (sqrt2 * (kf + 1.0) * (2.0 * kf + 3.0)),
            };
            (vec![1.0, s * a, b], scale)
        }
        3 => {
            let (a, b, c) = third_order_coeffs(kf);
            let scale = match side {
                Side::Trial => (kf + 2.0) * (kf + 3.0) / (2.0 * (2.0 * kf + 3.0)),
                Side::Test => 1.0 / ((kf + 1.0) * (kf + 2.0) * (2.0 * kf + 3.0)),
            };
            (vec![1.0, s * a, b, s * c], scale)
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "closed-form bases exist for orders 1..=3, got {m}"
            )))
        }
    };
    Ok(CompactBasis {
        order: m,
        side,
        k,
        combo,
        scale,
    })
}

pub(crate) fn third_order_coeffs(kf: f64) -> (f64, f64, f64) {
    let a = 3.0 * (2.0 * kf + 3.0) / (2.0 * kf + 5.0);
    let b = 3.0 * (kf + 1.0) / (kf + 3.0);
    let c = (kf + 1.0) * (2.0 * kf + 3.0) / ((kf + 3.0) * (2.0 * kf + 5.0));
    (a, b, c)
}

/// Homogeneous endpoint condition `v^{(l)}(±1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndpointCondition {
    pub derivative: usize,
    pub at_plus_one: bool,
}

impl EndpointCondition {
    pub const fn new(derivative: usize, at_plus_one: bool) -> Self {
        Self {
            derivative,
            at_plus_one,
        }
    }
}

/// Exact coefficients `[1, x_1, ..., x_c]` of `P_k + Σ x_i P_{k+i}` meeting
/// `c` homogeneous endpoint conditions, by rational Gaussian elimination.
pub fn endpoint_combo(k: usize, conditions: &[EndpointCondition]) -> Result<Vec<Rational>> {
    let c = conditions.len();
    // Rows: conditions; columns: unknowns x_1..x_c, then right-hand side.
    let mut a: Vec<Vec<Rational>> = conditions
        .iter()
        .map(|cond| {
            let value = |deg: usize| {
                let (num, den) = endpoint_derivative(deg, cond.derivative, cond.at_plus_one);
                Rational::new(num.into(), den.into())
            };
            let mut row: Vec<Rational> = (1..=c).map(|i| value(k + i)).collect();
            row.push(-value(k));
            row
        })
        .collect();
    for col in 0..c {
        let pivot = (col..c)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::SingularMatrix { pivot_index: col })?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..c {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=c {
                    let sub = f.clone() * a[col][j].clone();
                    a[r][j] = a[r][j].clone() - sub;
                }
            }
        }
    }
    let mut out = vec![<Rational as Field>::one()];
    out.extend(a.into_iter().map(|row| row[c].clone()));
    Ok(out)
}

/// Conditions of the order-`m` trial (`-1`) or test (`+1`) space.
pub fn order_conditions(m: usize, side: Side) -> Vec<EndpointCondition> {
    (0..m).map(|l| EndpointCondition::new(l, side == Side::Test)).collect()
}

/// Conditions of the third-order space problem: `v(±1) = v'(1) = 0` for the
/// trial space and `v(±1) = v'(-1) = 0` for the test space.
pub fn kdv_conditions(side: Side) -> Vec<EndpointCondition> {
    let plus = side == Side::Trial;
    vec![
        EndpointCondition::new(0, false),
        EndpointCondition::new(0, true),
        EndpointCondition::new(1, plus),
    ]
}

pub(crate) fn rational_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Field::to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn endpoint_value(series: &LegendreSeries, l: usize, at_plus: bool) -> f64 {
        let mut s = series.clone();
        for _ in 0..l {
            s = s.derivative();
        }
        s.eval(if at_plus { 1.0 } else { -1.0 })
    }

    #[test]
    fn first_order_trial_is_scaled_one_plus_t() {
        let b = compact_basis(1, Side::Trial, 0).unwrap();
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((b.eval(0.3) - 1.3 / sqrt2).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_meet_endpoint_conditions() {
        for m in 1..=3 {
            for side in [Side::Trial, Side::Test] {
                for k in 0..20 {
                    let b = compact_basis(m, side, k).unwrap().legendre();
                    for l in 0..m {
                        let v = endpoint_value(&b, l, side == Side::Test);
                        let scale = 1.0 + (k as f64).powi(2 * l as i32);
                        assert!(v.abs() < 1e-12 * scale, "m={m} {side:?} k={k} l={l}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_forms_match_condition_solver() {
        for m in 1..=3 {
            for side in [Side::Trial, Side::Test] {
                for k in 0..12 {
                    let exact = endpoint_combo(k, &order_conditions(m, side)).unwrap();
                    let b = compact_basis(m, side, k).unwrap();
                    for (x, y) in rational_to_f64(&exact).iter().zip(&b.combo) {
                        assert!((x - y).abs() < 1e-14, "m={m} {side:?} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn third_order_space_combos() {
        for k in 0..10 {
            let kf = k as f64;
            let a = (2.0 * kf + 3.0) / (2.0 * kf + 5.0);
            let trial = rational_to_f64(&endpoint_combo(k, &kdv_conditions(Side::Trial)).unwrap());
            let test = rational_to_f64(&endpoint_combo(k, &kdv_conditions(Side::Test)).unwrap());
            let expect_trial = [1.0, -a, -1.0, a];
            let expect_test = [1.0, a, -1.0, -a];
            for i in 0..4 {
                assert!((trial[i] - expect_trial[i]).abs() < 1e-15);
                assert!((test[i] - expect_test[i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unsupported_order_is_rejected() {
        assert!(compact_basis(4, Side::Trial, 0).is_err());
    }
}
