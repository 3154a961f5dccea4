//! Scalar model problems `u^(m) = σu` on `[-1, 1]`.

use spectral_time::ldpg::{exact_solution, solve_ivp, IvpStrategy};

fn main() -> spectral_time::Result<()> {
    let cases: [(usize, f64, &[f64]); 5] = [
        (1, -1.0, &[1.0]),
        (1, 4.0, &[1.0]),
        (2, -1.0, &[0.0, 1.0]),
        (2, 1.0, &[1.0, 1.0]),
        (3, 1.0, &[1.0, 1.0, 1.0]),
    ];
    for (m, sigma, inits) in cases {
        let exact = exact_solution(sigma, inits)?;
        for n in [8usize, 16, 24, 32] {
            let mut line = format!("m = {m}, sigma = {sigma:+}, N = {n:2}:");
            for strategy in [IvpStrategy::Direct, IvpStrategy::FirstOrderSystem] {
                let sol = solve_ivp(m, sigma, inits, n, strategy)?;
                let err = (0..=200)
                    .map(|i| -1.0 + 0.01 * i as f64)
                    .map(|t| (sol.eval(t) - exact(t)).abs())
                    .fold(0.0, f64::max);
                line.push_str(&format!("  {strategy:?} {err:.2e}"));
            }
            println!("{line}");
        }
    }
    Ok(())
}
