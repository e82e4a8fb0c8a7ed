//! Structured averages over W e^{-iDt} W† for Poisson and GUE spectra. The
//! ratio c = rms / delta is the same for every state at a given time.
//!
//!     cargo run --release --example structured_evolution

use discord_witness::dephasing::discord_report;
use discord_witness::montecarlo::MonteCarlo;
use discord_witness::randmat::level_transform_f;
use discord_witness::states::random_mixed;
use discord_witness::witness::{structured_average_distance, Averaging};
use discord_witness::{RngHandle, SpectrumEnsemble};

fn main() -> discord_witness::Result<()> {
    let mc = MonteCarlo::new(20_000).with_workers(4);
    let mut rng = RngHandle::new(8);
    let states: Vec<_> = (0..3)
        .map(|_| {
            let s = random_mixed(2, 2, 2, &mut rng)?;
            let r = discord_report(&s)?;
            Ok((s, r))
        })
        .collect::<discord_witness::Result<_>>()?;

    for ensemble in [SpectrumEnsemble::poisson(4), SpectrumEnsemble::gue(4)] {
        println!("{} spectrum", ensemble.kind.name());
        for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let mut line = format!("  t = {t:<4}");
            for (s, r) in &states {
                let est = structured_average_distance(
                    s,
                    &r.dephased,
                    &ensemble,
                    t,
                    Averaging::Annealed,
                    &mc,
                    &mut rng,
                )?;
                line += &format!(
                    "  c = {:.4} ± {:.4}",
                    est.rms() / r.delta,
                    est.rms_std_error() / r.delta
                );
            }
            println!("{line}");
        }
    }

    let levels = [0.0, 0.7, 1.9, 2.4];
    for t in [0.0, 1.0, 3.0] {
        let f = level_transform_f(&levels, t);
        println!("f({t}) for levels {levels:?} = {:.4}{:+.4}i", f.re, f.im);
    }
    Ok(())
}
