//! KdV soliton `u_t + u u_x + u_xxx = 0` by Newton-Krylov on space-time slabs.

use std::time::Instant;

use spectral_time::models::kdv::soliton;
use spectral_time::models::{solve_kdv, Domain, KdvProblem};

fn main() -> spectral_time::Result<()> {
    let xs = Domain::new(-50.0, 50.0).grid(401);
    for nx in [80, 120, 160] {
        let start = Instant::now();
        let p = KdvProblem::soliton(1.0, 1.0, 0.0, nx, 40, 10.0);
        let sol = solve_kdv(&p)?;
        let err = xs
            .iter()
            .zip(sol.values(&xs, 10.0))
            .map(|(x, u)| (u - soliton(*x, 10.0)).abs())
            .fold(0.0, f64::max);
        let newton: usize = sol.newton.iter().map(|r| r.iterations).sum();
        let gmres: usize = sol.newton.iter().map(|r| r.gmres_iterations).sum();
        println!(
            "N_x = {nx:3}: error at T = 10 {err:.2e}, {} slab(s), {newton} Newton / {gmres} GMRES steps, {:.2} s",
            sol.newton.len(),
            start.elapsed().as_secs_f64()
        );
    }

    // With damping the pulse decays.
    let damped = solve_kdv(&KdvProblem::soliton(1.0, 1.0, 0.1, 120, 24, 6.0))?;
    let peak = |t: f64| damped.values(&xs, t).iter().cloned().fold(f64::MIN, f64::max);
    println!("sigma = 0.1: peak {:.4} at t = 0, {:.4} at t = 6", peak(0.0), peak(6.0));
    Ok(())
}
