//! Schmidt decomposition and generalized concurrence of pure states, and the
//! identity delta = C / sqrt(2).
//!
//!     cargo run --example schmidt_concurrence

use discord_witness::dephasing::discord_delta;
use discord_witness::states::{concurrence_pure, from_pure, random_pure, schmidt};
use discord_witness::RngHandle;

fn main() -> discord_witness::Result<()> {
    let mut rng = RngHandle::new(3);
    for (d_s, d_e) in [(2, 2), (2, 3), (3, 3), (3, 4)] {
        let psi = random_pure(d_s, d_e, &mut rng);
        let sd = schmidt(&psi, d_s, d_e)?;
        let c = concurrence_pure(&psi, d_s, d_e)?;
        let delta = discord_delta(&from_pure(&psi, d_s, d_e)?)?;
        let coeffs: Vec<String> = sd.coefficients.iter().map(|l| format!("{l:.4}")).collect();
        let rebuilt = sd
            .reconstruct()
            .iter()
            .zip(&psi)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!(
            "({d_s},{d_e})  lambda = [{}]  C = {c:.6}  delta = {delta:.6}  |delta - C/sqrt2| = {:.1e}  reconstruction error = {rebuilt:.1e}",
            coeffs.join(", "),
            (delta - c / std::f64::consts::SQRT_2).abs()
        );
    }
    Ok(())
}
