//! Conditioning and eigenvalue moduli of `I + M_x`.
//!
//! The exact moduli come from the zeros of `B_N^{(3)}`. A dense eigen solve
//! agrees for small `N` only: the matrix is far from normal.

use spectral_time::models::conditioning;

fn main() -> spectral_time::Result<()> {
    println!("  N_x   cond2    min|l|   max|l| exact   max|l| dense");
    for nx in [20, 30, 40, 50, 100, 200] {
        let r = conditioning(nx)?;
        println!(
            "{:5}  {:.4}   {:.4}   {:.4}         {:.4}",
            r.nx, r.cond2, r.min_modulus, r.max_modulus, r.dense_max_modulus
        );
    }
    Ok(())
}
