//! Zeros of generalised Bessel polynomials and their enclosures.

use spectral_time::gbp::{gbp_zeros, real_zero_estimate, CrescentRegion};

fn main() -> spectral_time::Result<()> {
    for (n, alpha) in [(8, 2.0), (51, 3.0), (128, 5.0)] {
        let set = gbp_zeros(n, alpha, 1e-12)?;
        let region = CrescentRegion::new(n, alpha);
        let inside = set.zeros.iter().filter(|z| region.contains(**z)).count();
        let moduli: Vec<f64> = set.zeros.iter().map(|z| z.norm()).collect();
        let lo = moduli.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = moduli.iter().cloned().fold(0.0, f64::max);
        println!(
            "B_{n}^({alpha}): residual {:.1e} after {} Newton steps ({}), {inside}/{n} in the crescent, |z| in [{lo:.5}, {hi:.5}]",
            set.residual_inf, set.newton_steps, set.strategy
        );
        if n % 2 == 1 {
            let real = set.zeros.iter().find(|z| z.im == 0.0).map(|z| z.re);
            println!(
                "  real zero {:?}, asymptotic estimate {:.6}",
                real,
                real_zero_estimate(n, alpha)
            );
        }
    }

    // β only rescales: the zeros of B_n^(α,β) are β/2 times those for β = 2.
    let scaled = gbp_zeros(6, 2.0, 1e-12)?.with_beta(1.0)?;
    for z in &scaled.zeros {
        println!("  B_6^(2,1) zero {:+.6} {:+.6}i", z.re, z.im);
    }
    Ok(())
}
