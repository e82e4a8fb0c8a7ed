//! Dephase a few bipartite states in the eigenbasis of their marginal and
//! print the discord measure delta together with the purity route to it.
//!
//!     cargo run --example discord_basics

use discord_witness::dephasing::discord_report;
use discord_witness::matcore::ComplexMatrix;
use discord_witness::states::{classical_state, from_pure, random_mixed, BipartiteState};
use discord_witness::{Complex64, RngHandle};

fn show(name: &str, s: &BipartiteState) -> discord_witness::Result<()> {
    let r = discord_report(s)?;
    println!(
        "{name:<28} delta = {:.6}  P(rho) = {:.6}  P(rho') = {:.6}  sqrt(P - P') = {:.6}{}",
        r.delta,
        r.purity,
        r.purity_dephased,
        r.delta_from_purities(),
        if r.basis.degenerate {
            "  [degenerate marginal]"
        } else {
            ""
        }
    );
    Ok(())
}

fn main() -> discord_witness::Result<()> {
    let re = |x: f64| Complex64::new(x, 0.0);

    let psi = [re(0.8_f64.sqrt()), re(0.0), re(0.0), re(0.2_f64.sqrt())];
    show("sqrt(.8)|00> + sqrt(.2)|11>", &from_pure(&psi, 2, 2)?)?;

    let p = vec![vec![0.4, 0.1], vec![0.2, 0.3]];
    let id = ComplexMatrix::identity(2);
    show("classical table", &classical_state(&p, &id, &id)?)?;

    // |0><0| ⊗ |0><0| and |+><+| ⊗ |1><1| mixed equally: separable but discordant
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = [re(1.0), re(0.0)];
    let plus = [re(h), re(h)];
    let a = ComplexMatrix::outer(&zero, &zero)?;
    let b = ComplexMatrix::outer(&plus, &plus)?;
    let e0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
    let e1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    let rho = &discord_witness::tensor(&a, &e0).scale_real(0.5)
        + &discord_witness::tensor(&b, &e1).scale_real(0.5);
    show("separable, discordant", &BipartiteState::new(rho, 2, 2)?)?;

    let mut rng = RngHandle::new(7);
    for rank in [1, 2, 4] {
        show(
            &format!("random mixed, rank {rank}"),
            &random_mixed(2, 2, rank, &mut rng)?,
        )?;
    }
    Ok(())
}
