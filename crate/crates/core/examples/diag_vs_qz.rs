//! Diagonalisation against QZ for the all-at-once time system.
//!
//! The eigenvector matrix of the time mass matrix becomes ill conditioned
//! as `N_t` grows, and the diagonalisation solve loses accuracy with it.

use spectral_time::linalg::Matrix;
use spectral_time::models::{solve_wave, Domain, WaveProblem};
use spectral_time::timesolver::{DiagSolver, Strategy};

fn main() -> spectral_time::Result<()> {
    let xs = Domain::new(-50.0, 50.0).grid(201);
    let reference = solve_wave(&WaveProblem::pulse(160, 20, 40, 10.0), Strategy::Qz)?.values(&xs, 10.0);
    let zero = Matrix::zeros(1, 1);
    for nt in [4usize, 8, 12, 16, 20] {
        let cond = DiagSolver::with_cap(nt, &zero, usize::MAX)?.diagnostics.cond2_e;
        let mut line = format!("N_t = {nt:2}: cond2(E) {cond:9.2e}");
        for s in [Strategy::Diag, Strategy::Qz] {
            let u = solve_wave(&WaveProblem::pulse(160, nt, 10, 10.0), s)?.values(&xs, 10.0);
            let err = u.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            line.push_str(&format!("  {s:?} error {err:.2e}"));
        }
        println!("{line}");
    }
    Ok(())
}
