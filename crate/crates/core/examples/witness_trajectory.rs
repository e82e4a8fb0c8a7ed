//! Witness along time for one structured evolution W e^{-iDt} W†, for a
//! discordant and a classical state sharing the same evolution.
//!
//!     cargo run --example witness_trajectory

use discord_witness::states::{random_classical, random_mixed};
use discord_witness::witness::{time_grid, witness_trajectory};
use discord_witness::{RngHandle, SpectrumEnsemble};

fn main() -> discord_witness::Result<()> {
    let mut rng = RngHandle::new(12);
    let discordant = random_mixed(2, 3, 2, &mut rng)?;
    let classical = random_classical(2, 3, &mut rng)?;
    let ensemble = SpectrumEnsemble::gue(6);
    let times = time_grid(0.0, 6.0, 13);

    // same seed, so both states see the same W and levels
    let a = witness_trajectory(&discordant, &ensemble, &times, &mut RngHandle::new(40))?;
    let b = witness_trajectory(&classical, &ensemble, &times, &mut RngHandle::new(40))?;
    let td = a.trace_distance.unwrap_or_default();
    println!(
        "{:>5}  {:>12}  {:>12}  {:>12}",
        "t", "discordant", "trace dist", "classical"
    );
    for i in 0..times.len() {
        println!(
            "{:>5.2}  {:>12.6}  {:>12.6}  {:>12.3e}",
            times[i], a.hs_distance[i], td[i], b.hs_distance[i]
        );
    }
    Ok(())
}
