//! Monte Carlo over Haar unitaries against the closed-form average of
//! ‖Tr_E{U M U†}‖², first for random Hermitian M and then for M = rho - rho'.
//!
//!     cargo run --release --example haar_theorem

use discord_witness::dephasing::discord_report;
use discord_witness::montecarlo::MonteCarlo;
use discord_witness::randmat::gue_matrix;
use discord_witness::states::random_mixed;
use discord_witness::witness::{haar_prefactor_sq, theorem_mc_check};
use discord_witness::RngHandle;

fn main() -> discord_witness::Result<()> {
    let mc = MonteCarlo::new(20_000).with_workers(4);
    let mut rng = RngHandle::new(2024);

    println!("random Hermitian M");
    for (d_s, d_e) in [(2, 2), (2, 3), (3, 2), (2, 4)] {
        let m = gue_matrix(d_s * d_e, &mut rng);
        let check = theorem_mc_check(&m, d_s, d_e, &mc, &mut rng)?;
        println!(
            "  ({d_s},{d_e})  mc = {:.5} ± {:.5}  closed form = {:.5}  z = {:+.2}",
            check.estimate.mean,
            check.estimate.std_error,
            check.rhs,
            check.z_score()
        );
    }

    println!("M = rho - rho' (trace zero, so the average is prefactor² · delta²)");
    for (d_s, d_e) in [(2, 2), (3, 3)] {
        let s = random_mixed(d_s, d_e, 2, &mut rng)?;
        let r = discord_report(&s)?;
        let diff = s.rho() - r.dephased.rho();
        let check = theorem_mc_check(&diff, d_s, d_e, &mc, &mut rng)?;
        let k = haar_prefactor_sq(d_s, d_e).sqrt();
        println!(
            "  ({d_s},{d_e})  rms = {:.5} ± {:.5}  prefactor · delta = {:.5} · {:.5} = {:.5}",
            check.estimate.rms(),
            check.estimate.rms_std_error(),
            k,
            r.delta,
            k * r.delta
        );
    }
    Ok(())
}
