//! The Haar twirl ∫ U†AU X U†BU against a Tr(X) I + b X.
//!
//!     cargo run --release --example twirl_lemma

use discord_witness::matcore::ComplexMatrix;
use discord_witness::montecarlo::MonteCarlo;
use discord_witness::randmat::{ginibre, gue_matrix};
use discord_witness::witness::twirl::{twirl_constants, twirl_mc};
use discord_witness::RngHandle;

fn main() -> discord_witness::Result<()> {
    let sz = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
    let k = twirl_constants(&sz, &sz)?;
    println!("A = B = sigma_z, d = 2: a = {:.6}, b = {:.6}", k.a, k.b);

    let d = 4;
    let mut rng = RngHandle::new(99);
    let a = gue_matrix(d, &mut rng);
    let b = gue_matrix(d, &mut rng);
    let x = ginibre(d, &mut rng);
    let k = twirl_constants(&a, &b)?;
    let tr_ba = b.matmul(&a).trace().re;
    println!(
        "random A, B at d = {d}: a = {:.6}, b = {:.6}, a d + b = {:.6}, Tr(BA)/d = {:.6}",
        k.a,
        k.b,
        k.a * d as f64 + k.b,
        tr_ba / d as f64
    );

    let est = twirl_mc(
        &a,
        &b,
        &x,
        &MonteCarlo::new(50_000).with_workers(4),
        &mut rng,
    )?;
    let exact = k.apply(&x);
    println!(
        "50000 samples: max elementwise |z| = {:.2}, max |mc - exact| = {:.2e}",
        est.max_z_score(&exact, 1e-12),
        est.mean.max_abs_diff(&exact)
    );
    Ok(())
}
