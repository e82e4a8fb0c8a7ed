//! Nearest-neighbour spacing histograms for Poisson and unfolded GUE
//! spectra. GUE levels repel, so small spacings are rare.
//!
//!     cargo run --release --example level_statistics

use discord_witness::randmat::sample_spectrum;
use discord_witness::{RngHandle, SpectrumEnsemble};

fn histogram(
    ensemble: &SpectrumEnsemble,
    draws: usize,
    rng: &mut RngHandle,
) -> discord_witness::Result<Vec<f64>> {
    let bins = 12;
    let width = 0.25;
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for _ in 0..draws {
        let levels = sample_spectrum(ensemble, rng)?;
        // middle 80% of the spectrum only
        let lo = levels.len() / 10;
        let hi = levels.len() - lo;
        for w in levels[lo..hi].windows(2) {
            let s = (w[1] - w[0]) / ensemble.mean_spacing;
            total += 1;
            let k = (s / width) as usize;
            if k < bins {
                counts[k] += 1;
            }
        }
    }
    Ok(counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * width))
        .collect())
}

fn main() -> discord_witness::Result<()> {
    let mut rng = RngHandle::new(31);
    let poisson = histogram(&SpectrumEnsemble::poisson(64), 40, &mut rng)?;
    let gue = histogram(&SpectrumEnsemble::gue(64), 40, &mut rng)?;
    println!(
        "{:>6}  {:>8}  {:>8}  {:>8}  {:>8}",
        "s", "poisson", "e^-s", "gue", "surmise"
    );
    for (k, (p, g)) in poisson.iter().zip(&gue).enumerate() {
        let s = (k as f64 + 0.5) * 0.25;
        let pi = std::f64::consts::PI;
        let surmise = 32.0 / (pi * pi) * s * s * (-4.0 * s * s / pi).exp();
        println!(
            "{s:>6.3}  {p:>8.3}  {:>8.3}  {g:>8.3}  {surmise:>8.3}",
            (-s).exp()
        );
    }
    Ok(())
}
