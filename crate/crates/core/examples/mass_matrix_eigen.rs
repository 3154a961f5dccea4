//! Spectra of the dual-Petrov-Galerkin mass matrices against polynomial zeros.
//!
//! The first-order matrix has eigenvalues `-z_j` for the zeros of
//! `B_N^{(3)}`; the second-order pseudospectral matrix is exactly the square
//! of the `B_N^{(4)}` Jacobi matrix.

use spectral_time::field::{Field, Rational};
use spectral_time::gbp::{gbp_zeros, jacobi_matrix_field};
use spectral_time::ldpg::{mass_matrix_m1, mass_matrix_m2, mass_matrix_m3, SecondOrderVariant};
use spectral_time::linalg::{eigenvalues, matched_max_deviation};
use spectral_time::Complex64;

fn main() -> spectral_time::Result<()> {
    for n in [4usize, 8, 12] {
        let ev = eigenvalues(&mass_matrix_m1::<f64>(n).to_dense())?;
        let neg: Vec<Complex64> = gbp_zeros(n, 3.0, 1e-13)?.zeros.iter().map(|z| -z).collect();
        println!(
            "N = {n:2}: first order vs -z(B^(3)) {:.2e}",
            matched_max_deviation(&ev, &neg)
        );

        let m2 = mass_matrix_m2::<f64>(n, SecondOrderVariant::Pseudospectral);
        let sq: Vec<Complex64> = gbp_zeros(n, 4.0, 1e-13)?.zeros.iter().map(|z| z * z).collect();
        println!(
            "        second order vs z(B^(4))^2 {:.2e}",
            matched_max_deviation(&eigenvalues(&m2.to_dense())?, &sq)
        );

        let m3 = mass_matrix_m3::<f64>(n);
        let cube: Vec<Complex64> = gbp_zeros(n, 5.0, 1e-13)?.zeros.iter().map(|z| -z.powu(3)).collect();
        println!(
            "        third order vs (-z(B^(5)))^3 {:.2e}",
            matched_max_deviation(&eigenvalues(&m3.to_dense())?, &cube)
        );
    }

    let n = 16;
    let diff = mass_matrix_m2::<Rational>(n, SecondOrderVariant::Pseudospectral)
        .sub(&jacobi_matrix_field(n, &Rational::from_ratio(4, 1)).pow(2));
    println!("exact M2 - J^2 at N = {n}: {} non-zero entries", diff.support().len());
    Ok(())
}
