//! Choi matrix of the sampled twirl against (a/d) I + b |Omega><Omega|.
//!
//!     cargo run --release --example choi_isotropic

use discord_witness::montecarlo::MonteCarlo;
use discord_witness::randmat::gue_matrix;
use discord_witness::witness::twirl::{choi_isotropic_check, choi_matrix, twirl_constants};
use discord_witness::RngHandle;

fn main() -> discord_witness::Result<()> {
    let d = 3;
    let mut rng = RngHandle::new(5);
    let a = gue_matrix(d, &mut rng);
    let b = gue_matrix(d, &mut rng);

    let k = twirl_constants(&a, &b)?;
    let exact = choi_matrix(|x| k.apply(x), d);
    println!(
        "analytic map: max |choi - isotropic| = {:.1e}",
        exact.max_abs_diff(&k.isotropic_choi(d))
    );

    for n in [2_000, 8_000, 32_000] {
        let check = choi_isotropic_check(&a, &b, &MonteCarlo::new(n).with_workers(4), &mut rng)?;
        let df = d as f64;
        println!(
            "n = {n:>6}  residual = {:.5}  aggregate error = {:.5}  Tr = {:.5} (a d + b = {:.5})  <Omega|rho|Omega> = {:.5} (a/d + b = {:.5})",
            check.residual,
            check.aggregate_error,
            check.trace,
            k.a * df + k.b,
            check.omega_element,
            k.a / df + k.b
        );
    }
    Ok(())
}
