mod common;

use proptest::prelude::*;
use spectral_time::cli::config_to_args;
use spectral_time::gbp::{gbp_zeros, jacobi_matrix, CrescentRegion};
use spectral_time::io::{parse_csv, Table};
use spectral_time::ldpg::{collocation_d, mass_matrix_m1, solve_ivp, IvpStrategy};
use spectral_time::linalg::{eigenvalues, lu_solve, Matrix};
use spectral_time::models::{gmres, Domain};
use spectral_time::polybasis::gauss_rule;
use spectral_time::timesolver::time_basis_values;
use spectral_time::Complex64;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeros_match_polynomial_roots(n in 2usize..=9, alpha in 2.0f64..6.0) {
        let set = gbp_zeros(n, alpha, 1e-13).unwrap();
        let oracle = poly_roots(&bessel_coeffs(n, alpha));
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(spectrum_distance(&set.zeros, &oracle) < 1e-9 * scale);
        let region = CrescentRegion::new(n, alpha);
        for z in &set.zeros {
            prop_assert!(z.re < 0.0);
            prop_assert!(region.contains(*z));
            let partner = set.zeros.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner < 1e-12 * scale);
        }
    }

    #[test]
    fn jacobi_spectrum_is_negated_zeros(n in 2usize..=12, alpha in 2.0f64..5.0) {
        let ev = eigenvalues(&jacobi_matrix(n, alpha).to_dense()).unwrap();
        let neg: Vec<Complex64> = poly_roots(&bessel_coeffs(n, alpha)).iter().map(|z| -z).collect();
        let scale = neg.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(spectrum_distance(&ev, &neg) < 1e-8 * scale);
    }

    #[test]
    fn collocation_differentiates_admissible_polynomials(n in 2usize..=16, seed in proptest::collection::vec(-1.0f64..1.0, 16)) {
        // u = (1 + t) h(t), deg h ≤ n - 1, is reproduced exactly.
        let h: Vec<f64> = seed[..n].to_vec();
        let u = |t: f64| (1.0 + t) * legendre(n - 1, t).iter().zip(&h).map(|(p, c)| p * c).sum::<f64>();
        let du = |t: f64| (u(t + 1e-6) - u(t - 1e-6)) / 2e-6;
        let (nodes, _) = gauss(n);
        prop_assert!(max_abs_diff(&nodes, &gauss_rule(n).nodes) < 1e-14);
        let values: Vec<f64> = nodes.iter().map(|&t| u(t)).collect();
        let got = collocation_d(n).mul_vec(&values);
        let want: Vec<f64> = nodes.iter().map(|&t| du(t)).collect();
        let scale = want.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!(max_abs_diff(&got, &want) < 1e-6 * scale);
    }

    #[test]
    fn first_order_ivp_is_exponential(sigma in -2.0f64..2.0, u0 in -3.0f64..3.0) {
        let sol = solve_ivp(1, sigma, &[u0], 24, IvpStrategy::Direct).unwrap();
        for t in [-1.0, -0.3, 0.5, 1.0] {
            let exact = u0 * (sigma * (t + 1.0)).exp();
            prop_assert!((sol.eval(t) - exact).abs() < 1e-12 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn csv_round_trips(rows in proptest::collection::vec(proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0..20)) {
        let mut t = Table::new(&["a", "b", "c"]);
        for r in rows {
            t.push(r);
        }
        prop_assert_eq!(parse_csv(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn domain_maps_are_inverse(left in -100.0f64..0.0, width in 0.1f64..200.0, xi in -1.0f64..1.0) {
        let d = Domain::new(left, left + width);
        let x = d.to_physical(xi);
        prop_assert!((d.to_reference(x) - xi).abs() < 1e-12);
        let g = d.grid(7);
        prop_assert_eq!(g[0], left);
        prop_assert!((g[6] - (left + width)).abs() < 1e-12 * width.max(1.0));
    }

    #[test]
    fn config_keys_become_flags(n in 1usize..200, alpha in 2.0f64..9.0) {
        let text = format!(r#"{{"command": "gbp-zeros", "n": {n}, "alpha": {alpha:?}}}"#);
        let args = config_to_args(&text).unwrap();
        prop_assert_eq!(&args[1], "gbp-zeros");
        let pos = args.iter().position(|a| a == "--alpha").unwrap();
        prop_assert_eq!(args[pos + 1].parse::<f64>().unwrap(), alpha);
        let pos = args.iter().position(|a| a == "--n").unwrap();
        prop_assert_eq!(args[pos + 1].parse::<usize>().unwrap(), n);
    }

    #[test]
    fn time_basis_vanishes_at_start(nt in 1usize..40, tau in -1.0f64..1.0) {
        prop_assert!(time_basis_values(nt, -1.0).iter().all(|v| v.abs() < 1e-12));
        let v = time_basis_values(nt, tau);
        let p = legendre(nt, tau);
        for k in 0..nt {
            let want = (k as f64 + 1.0) / std::f64::consts::SQRT_2 * (p[k] + p[k + 1]);
            prop_assert!((v[k] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn gmres_solves_diagonally_dominant_systems(n in 2usize..40, entries in proptest::collection::vec(-1.0f64..1.0, 1600)) {
        let a = Matrix::from_fn(n, n, |i, j| entries[i * 40 + j] + if i == j { 2.0 * n as f64 } else { 0.0 });
        let b: Vec<f64> = (0..n).map(|i| entries[1599 - i]).collect();
        let out = gmres(|x| a.mul_vec(x), |v| v.to_vec(), &b, 10, 1e-12, 400).unwrap();
        let r: Vec<f64> = a.mul_vec(&out.x).iter().zip(&b).map(|(x, y)| x - y).collect();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-11 * bn.max(1e-300));
    }
}

#[test]
fn first_order_mass_matrix_matches_quadrature_pencil() {
    for n in 1..=12 {
        let (mass, stiff) = first_order_pencil(n);
        let s = Matrix::from_rows(&stiff);
        let b = Matrix::from_rows(&mass);
        let oracle = eigenvalues(&lu_solve(&s, &b).unwrap()).unwrap();
        let ev = eigenvalues(&mass_matrix_m1::<f64>(n).to_dense()).unwrap();
        assert!(spectrum_distance(&ev, &oracle) < 1e-10, "N = {n}");
        let neg: Vec<Complex64> = poly_roots(&bessel_coeffs(n, 3.0)).iter().map(|z| -z).collect();
        assert!(spectrum_distance(&ev, &neg) < 1e-8, "N = {n}");
    }
}

#[test]
fn soliton_solves_kdv() {
    use spectral_time::models::kdv::soliton;
    let h = 1e-3;
    for (x, t) in [(-7.0, 0.0), (-4.0, 1.5), (-1.0, 3.0), (2.0, 9.0)] {
        assert!((soliton(x, t) - kdv_soliton(x, t)).abs() < 1e-14);
        let u = |x: f64, t: f64| soliton(x, t);
        let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let ux = (u(x + h, t) - u(x - h, t)) / (2.0 * h);
        let uxxx = (u(x + 2.0 * h, t) - 2.0 * u(x + h, t) + 2.0 * u(x - h, t) - u(x - 2.0 * h, t)) / (2.0 * h.powi(3));
        assert!((ut + u(x, t) * ux + uxxx).abs() < 1e-5);
    }
}
