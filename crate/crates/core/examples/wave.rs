//! Space-time solution of `u_xt + σu = 0` with a travelling pulse.

use spectral_time::models::{solve_wave, Domain, WaveProblem};
use spectral_time::timesolver::Strategy;

fn main() -> spectral_time::Result<()> {
    let p = WaveProblem::pulse(160, 10, 10, 10.0);
    let sol = solve_wave(&p, Strategy::Qz)?;
    println!("sigma-hat per slab {:.2}", p.sigma_hat());

    let xs = Domain::new(-50.0, 50.0).grid(11);
    for t in [0.0, 2.5, 5.0, 10.0] {
        let row: Vec<String> = sol.values(&xs, t).iter().map(|u| format!("{u:+.4}")).collect();
        println!("t = {t:4.1}: {}", row.join(" "));
    }

    let fine = solve_wave(&WaveProblem::pulse(160, 20, 40, 10.0), Strategy::Qz)?;
    let grid = Domain::new(-50.0, 50.0).grid(201);
    for (nt, slabs) in [(10, 10), (14, 10), (100, 1)] {
        let s = solve_wave(&WaveProblem::pulse(160, nt, slabs, 10.0), Strategy::Qz)?;
        let err = s
            .values(&grid, 10.0)
            .iter()
            .zip(fine.values(&grid, 10.0))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("N_t = {nt:3} on {slabs:2} slab(s): difference from fine run {err:.2e}");
    }
    Ok(())
}
