//! Legendre-Gauss collocation for `u' = σu` and its link to the mass matrix.

use spectral_time::cli::collocation_real_eigenvalue;
use spectral_time::gbp::gbp_zeros;
use spectral_time::ldpg::collocation_d;
use spectral_time::linalg::{eigenvalues, matched_max_deviation};
use spectral_time::Complex64;

fn main() -> spectral_time::Result<()> {
    for n in [4usize, 8, 12, 16] {
        let ev = eigenvalues(&collocation_d(n))?;
        let recip: Vec<Complex64> = gbp_zeros(n, 2.0, 1e-13)?.zeros.iter().map(|z| -1.0 / z).collect();
        println!(
            "N = {n:2}: eig(D) vs -1/z(B^(2)) {:.2e}",
            matched_max_deviation(&ev, &recip)
        );
    }
    for n in [11usize, 25, 51, 101] {
        let lambda = collocation_real_eigenvalue(n)?;
        println!(
            "N = {n:3}: real eigenvalue {lambda:9.4}, lambda * 1.50888 / N = {:.4}",
            lambda * 1.50888 / n as f64
        );
    }
    Ok(())
}
