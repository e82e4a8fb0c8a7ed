//! The local-detection witness and its Haar averages.
//!
//! For a state `ρ` and its locally dephased image `ρ'`, the witness after a
//! global unitary `U` is `‖Tr_E{U(ρ − ρ')U†}‖`. A nonzero value proves that
//! `ρ` carries nonclassical correlations. Averaged over Haar-random `U` its
//! square equals `(d_S² d_E − d_E)/(d_S² d_E² − 1) · δ(ρ)²`, see
//! [`theorem_rhs`] for the general closed form.

pub mod twirl;

use crate::dephasing::dephase_total_matrix;
use crate::matcore::{
    conj_by_unitary, conj_unchecked, eig_hermitian, hs_norm, hs_norm_sqr, partial_trace_env,
    ComplexMatrix, STRUCTURE_TOL,
};
use crate::montecarlo::{estimate_mean, McEstimate, MonteCarlo};
use crate::randmat::{
    haar_unitary, sample_spectrum, structured_evolution, RngHandle, SpectrumEnsemble,
    StructuredEvolution,
};
use crate::states::BipartiteState;
use crate::{Error, Result};

/// Witness values along a time grid for one evolution.
#[derive(Clone, Debug)]
pub struct WitnessResult {
    pub time_grid: Vec<f64>,
    pub hs_distance: Vec<f64>,
    /// Trace distance between the reduced states; diagnostic only.
    pub trace_distance: Option<Vec<f64>>,
    pub metadata: WitnessMetadata,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessMetadata {
    pub seed: u64,
    pub d_s: usize,
    pub d_e: usize,
    pub ensemble: String,
}

fn check_pair(rho: &BipartiteState, rho_deph: &BipartiteState) -> Result<()> {
    if rho.d_s() != rho_deph.d_s() || rho.d_e() != rho_deph.d_e() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: rho_deph.dim(),
        });
    }
    Ok(())
}

/// `Tr_E{U M U†}` without the unitarity check.
fn reduced_conjugate(
    u: &ComplexMatrix,
    m: &ComplexMatrix,
    d_s: usize,
    d_e: usize,
) -> ComplexMatrix {
    partial_trace_env(&conj_unchecked(u, m), d_s, d_e).expect("dimensions checked by caller")
}

/// `Tr_E{U(ρ − ρ')U†}`, the difference of the evolved open-system states.
pub fn reduced_difference(
    rho: &BipartiteState,
    rho_deph: &BipartiteState,
    u: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_pair(rho, rho_deph)?;
    let diff = rho.rho() - rho_deph.rho();
    let evolved = conj_by_unitary(u, &diff)?;
    partial_trace_env(&evolved, rho.d_s(), rho.d_e())
}

/// `‖Tr_E{U(ρ − ρ')U†}‖`.
pub fn witness_distance(
    rho: &BipartiteState,
    rho_deph: &BipartiteState,
    u: &ComplexMatrix,
) -> Result<f64> {
    Ok(hs_norm(&reduced_difference(rho, rho_deph, u)?))
}

/// `(d_S² d_E − d_E)/(d_S² d_E² − 1)`: the Haar-averaged squared witness per
/// unit `δ(ρ)²`.
pub fn haar_prefactor_sq(d_s: usize, d_e: usize) -> f64 {
    let (s, e) = (d_s as f64, d_e as f64);
    let denom = s * s * e * e - 1.0;
    if denom == 0.0 {
        return 0.0;
    }
    (s * s * e - e) / denom
}

/// RMS witness per unit concurrence for pure states,
/// `sqrt((d_S² d_E − d_E)/(2(d_S² d_E² − 1)))`.
pub fn pure_state_prefactor(d_s: usize, d_e: usize) -> f64 {
    (haar_prefactor_sq(d_s, d_e) / 2.0).sqrt()
}

/// Monte Carlo estimate of `⟨‖Tr_E{U(ρ − ρ')U†}‖²⟩` over Haar `U`.
pub fn haar_average_distance_sq(
    rho: &BipartiteState,
    rho_deph: &BipartiteState,
    mc: &MonteCarlo,
    rng: &mut RngHandle,
) -> Result<McEstimate> {
    check_pair(rho, rho_deph)?;
    let (d_s, d_e) = (rho.d_s(), rho.d_e());
    let diff = rho.rho() - rho_deph.rho();
    estimate_mean(mc, rng, |r| {
        let u = haar_unitary(d_s * d_e, r);
        Ok(hs_norm_sqr(&reduced_conjugate(&u, &diff, d_s, d_e)))
    })
}

fn check_hermitian_operator(m: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<()> {
    if d_s == 0 || d_e == 0 || m.dim() != d_s * d_e {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_e,
            found: m.dim(),
        });
    }
    if !m.is_hermitian(STRUCTURE_TOL) {
        return Err(Error::NotHermitian {
            residual: m.hermiticity_residual(),
        });
    }
    Ok(())
}

/// Closed form of `⟨‖Tr_E{U M U†}‖²⟩` over Haar `U` for Hermitian `M`:
///
/// `(d_S² d_E − d_E)/(d_S² d_E² − 1) ‖M‖² + (d_S d_E² − d_S)/(d_S² d_E² − 1) (Tr M)²`.
pub fn theorem_rhs(m: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<f64> {
    check_hermitian_operator(m, d_s, d_e)?;
    let tr = m.trace().re;
    if d_s * d_e == 1 {
        // nothing to average: Δ is the scalar M itself
        return Ok(tr * tr);
    }
    let (s, e) = (d_s as f64, d_e as f64);
    let denom = s * s * e * e - 1.0;
    Ok((s * s * e - e) / denom * hs_norm_sqr(m) + (s * e * e - s) / denom * tr * tr)
}

/// Monte Carlo estimate next to the closed form.
#[derive(Clone, Copy, Debug)]
pub struct TheoremCheck {
    pub estimate: McEstimate,
    pub rhs: f64,
}

impl TheoremCheck {
    pub fn z_score(&self) -> f64 {
        self.estimate.z_score(self.rhs)
    }

    /// `|mean − rhs| ≤ k σ`, with an absolute floor for zero-variance cases.
    pub fn agrees_within(&self, k_sigma: f64) -> bool {
        let dev = (self.estimate.mean - self.rhs).abs();
        dev <= k_sigma * self.estimate.std_error + 1e-12 * self.rhs.abs().max(1.0)
    }
}

/// Samples `‖Tr_E{U M U†}‖²` over Haar `U` and evaluates [`theorem_rhs`].
pub fn theorem_mc_check(
    m: &ComplexMatrix,
    d_s: usize,
    d_e: usize,
    mc: &MonteCarlo,
    rng: &mut RngHandle,
) -> Result<TheoremCheck> {
    let rhs = theorem_rhs(m, d_s, d_e)?;
    let estimate = estimate_mean(mc, rng, |r| {
        let u = haar_unitary(d_s * d_e, r);
        Ok(hs_norm_sqr(&reduced_conjugate(&u, m, d_s, d_e)))
    })?;
    Ok(TheoremCheck { estimate, rhs })
}

/// How level spectra enter the structured average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Redraw the spectrum with every eigenvector sample.
    #[default]
    Annealed,
    /// Draw one spectrum up front and average over eigenvectors only.
    Quenched,
}

impl Averaging {
    pub fn name(self) -> &'static str {
        match self {
            Averaging::Annealed => "annealed",
            Averaging::Quenched => "quenched",
        }
    }
}

/// Monte Carlo estimate of `⟨‖Tr_E{U_t(ρ − ρ')U_t†}‖²⟩` for
/// `U_t = W e^{-iDt} W†` with Haar `W` and levels from `ensemble`.
///
/// At `t = 0` the evolution is the identity for every sample and the marginals
/// of `ρ` and `ρ'` coincide, so the exact value 0 is returned.
pub fn structured_average_distance(
    rho: &BipartiteState,
    rho_deph: &BipartiteState,
    ensemble: &SpectrumEnsemble,
    t: f64,
    averaging: Averaging,
    mc: &MonteCarlo,
    rng: &mut RngHandle,
) -> Result<McEstimate> {
    check_pair(rho, rho_deph)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time must be >= 0, got {t}"
        )));
    }
    if ensemble.dim != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: ensemble.dim,
        });
    }
    if mc.n_samples < 2 {
        return Err(Error::TooFewSamples(mc.n_samples));
    }
    if t == 0.0 {
        return Ok(McEstimate::exact(0.0, mc.n_samples));
    }
    let (d_s, d_e) = (rho.d_s(), rho.d_e());
    let diff = rho.rho() - rho_deph.rho();
    let frozen = match averaging {
        Averaging::Quenched => Some(sample_spectrum(ensemble, rng)?),
        Averaging::Annealed => None,
    };
    estimate_mean(mc, rng, |r| {
        let se = match &frozen {
            Some(levels) => {
                StructuredEvolution::new(haar_unitary(ensemble.dim, r), levels.clone())?
            }
            None => structured_evolution(ensemble, r)?,
        };
        let u = se.evolve(t);
        Ok(hs_norm_sqr(&reduced_conjugate(&u, &diff, d_s, d_e)))
    })
}

/// `(1/2) Σ |eigenvalues of (a − b)|` for Hermitian `a`, `b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = a - b;
    let es = eig_hermitian(&diff)?;
    Ok(0.5 * es.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

/// Witness along `times` for one structured evolution drawn from `ensemble`.
///
/// The dephased state is built from the eigenbasis of `ρ_S`.
pub fn witness_trajectory(
    rho: &BipartiteState,
    ensemble: &SpectrumEnsemble,
    times: &[f64],
    rng: &mut RngHandle,
) -> Result<WitnessResult> {
    if ensemble.dim != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: ensemble.dim,
        });
    }
    let seed = rng.seed();
    let basis = crate::dephasing::eigenbasis_of_marginal(rho)?;
    let (d_s, d_e) = (rho.d_s(), rho.d_e());
    let rho_deph = dephase_total_matrix(rho.rho(), d_s, d_e, &basis)?;
    let se = structured_evolution(ensemble, rng)?;

    let mut hs = Vec::with_capacity(times.len());
    let mut td = Vec::with_capacity(times.len());
    for &t in times {
        let u = se.evolve(t);
        let a = reduced_conjugate(&u, rho.rho(), d_s, d_e);
        let b = reduced_conjugate(&u, &rho_deph, d_s, d_e);
        hs.push(hs_norm(&(&a - &b)));
        td.push(trace_distance(&a.hermitian_part(), &b.hermitian_part())?);
    }
    Ok(WitnessResult {
        time_grid: times.to_vec(),
        hs_distance: hs,
        trace_distance: Some(td),
        metadata: WitnessMetadata {
            seed,
            d_s,
            d_e,
            ensemble: ensemble.kind.name().to_string(),
        },
    })
}

/// Evenly spaced grid of `steps` points from `start` to `stop` inclusive.
pub fn time_grid(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}
