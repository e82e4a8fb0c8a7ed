//! Random matrices: Ginibre and Haar sampling, level-spectrum ensembles,
//! structured evolutions `W e^{-iDt} W†` and the level-density transform
//! `f(t)`.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matcore::{eig_hermitian, ComplexMatrix};
use crate::{Error, Result};

/// Seeded ChaCha8 generator with an explicit stream index.
///
/// Two handles with the same `(seed, stream)` produce identical sequences.
/// Independent workers or Monte Carlo chunks use [`RngHandle::derive`].
#[derive(Clone, Debug)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl RngHandle {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            seed,
            stream,
            rng,
            spare_normal: None,
        }
    }

    /// A fresh handle on the same seed and a different stream.
    pub fn derive(&self, stream: u64) -> Self {
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Pair of independent standard normals (Marsaglia polar method).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                return (u * f, v * f);
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let (a, b) = self.normal_pair();
        self.spare_normal = Some(b);
        a
    }

    /// Complex normal with independent standard normal real and imaginary parts.
    pub fn complex_normal(&mut self) -> Complex64 {
        let (re, im) = self.normal_pair();
        Complex64::new(re, im)
    }

    /// Exponential variate with the given mean.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * (1.0 - self.uniform()).ln()
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// `d x d` matrix of iid complex normals; real and imaginary parts each have
/// variance 1, so `E|entry|^2 = 2`.
pub fn ginibre(d: usize, rng: &mut RngHandle) -> ComplexMatrix {
    let data = (0..d * d).map(|_| rng.complex_normal()).collect();
    ComplexMatrix::from_row_major(d, data).expect("d >= 1")
}

/// Rectangular `rows x cols` Ginibre block, row-major.
pub fn ginibre_rect(rows: usize, cols: usize, rng: &mut RngHandle) -> Vec<Complex64> {
    (0..rows * cols).map(|_| rng.complex_normal()).collect()
}

/// Hermitian matrix `(G + G†)/2` with `G` Ginibre.
pub fn gue_matrix(d: usize, rng: &mut RngHandle) -> ComplexMatrix {
    ginibre(d, rng).hermitian_part()
}

/// Haar-distributed unitary: Householder QR of a Ginibre matrix with each
/// column of `Q` multiplied by the phase of the matching diagonal entry of `R`.
pub fn haar_unitary(d: usize, rng: &mut RngHandle) -> ComplexMatrix {
    let g = ginibre(d, rng);
    let (mut q, r_diag) = householder_qr(g);
    for (j, r) in r_diag.iter().enumerate() {
        let norm = r.norm();
        let phase = if norm > 0.0 {
            r / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Returns `Q` and the diagonal of `R` for `a = Q R`.
fn householder_qr(mut r: ComplexMatrix) -> (ComplexMatrix, Vec<Complex64>) {
    let n = r.dim();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        let len = n - k;
        let x0 = r[(k, k)];
        let norm = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        for (i, vi) in v[..len].iter_mut().enumerate() {
            *vi = r[(k + i, k)];
        }
        v[0] -= alpha;
        let v_norm_sqr: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        if v_norm_sqr == 0.0 {
            continue;
        }
        let scale = 2.0 / v_norm_sqr;

        // R <- H R on the trailing block.
        for j in k..n {
            let w: Complex64 = (0..len).map(|i| v[i].conj() * r[(k + i, j)]).sum();
            let w = w * scale;
            for i in 0..len {
                let vi = v[i];
                r[(k + i, j)] -= vi * w;
            }
        }
        // Q <- Q H.
        for i in 0..n {
            let w: Complex64 = (0..len).map(|l| q[(i, k + l)] * v[l]).sum();
            let w = w * scale;
            for l in 0..len {
                let vl = v[l];
                q[(i, k + l)] -= w * vl.conj();
            }
        }
    }
    let diag = (0..n).map(|i| r[(i, i)]).collect();
    (q, diag)
}

/// Level statistics of a spectrum ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Uncorrelated levels: exponential spacings (regular dynamics).
    Poisson,
    /// Eigenvalues of a GUE matrix, unfolded to the requested mean spacing
    /// (chaotic dynamics, level repulsion).
    Gue,
    /// A fixed list of levels.
    Explicit,
}

impl SpectrumKind {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Poisson => "poisson",
            SpectrumKind::Gue => "gue",
            SpectrumKind::Explicit => "explicit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEnsemble {
    pub kind: SpectrumKind,
    pub dim: usize,
    pub mean_spacing: f64,
    pub explicit_levels: Option<Vec<f64>>,
}

impl SpectrumEnsemble {
    pub fn poisson(dim: usize) -> Self {
        Self {
            kind: SpectrumKind::Poisson,
            dim,
            mean_spacing: 1.0,
            explicit_levels: None,
        }
    }

    pub fn gue(dim: usize) -> Self {
        Self {
            kind: SpectrumKind::Gue,
            dim,
            mean_spacing: 1.0,
            explicit_levels: None,
        }
    }

    pub fn explicit(levels: Vec<f64>) -> Self {
        Self {
            kind: SpectrumKind::Explicit,
            dim: levels.len(),
            mean_spacing: 1.0,
            explicit_levels: Some(levels),
        }
    }

    pub fn with_mean_spacing(mut self, spacing: f64) -> Self {
        self.mean_spacing = spacing;
        self
    }
}

/// Draws one spectrum, sorted ascending.
pub fn sample_spectrum(ensemble: &SpectrumEnsemble, rng: &mut RngHandle) -> Result<Vec<f64>> {
    let d = ensemble.dim;
    if d == 0 {
        return Err(Error::DimensionTooSmall(0));
    }
    let mut levels = match ensemble.kind {
        SpectrumKind::Explicit => match &ensemble.explicit_levels {
            Some(levels) if levels.len() == d => levels.clone(),
            other => {
                return Err(Error::MissingLevels {
                    dim: d,
                    found: other.as_ref().map_or(0, Vec::len),
                })
            }
        },
        SpectrumKind::Poisson => {
            let mut acc = 0.0;
            let mut levels = Vec::with_capacity(d);
            levels.push(acc);
            for _ in 1..d {
                acc += rng.exponential(ensemble.mean_spacing);
                levels.push(acc);
            }
            levels
        }
        SpectrumKind::Gue => {
            let mut levels = eig_hermitian(&gue_matrix(d, rng))?.eigenvalues;
            if let Some(spacing) = bulk_mean_spacing(&levels) {
                let factor = ensemble.mean_spacing / spacing;
                levels.iter_mut().for_each(|e| *e *= factor);
            }
            levels
        }
    };
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

/// Mean spacing over the middle 80% of a sorted spectrum.
pub fn bulk_mean_spacing(levels: &[f64]) -> Option<f64> {
    let n = levels.len();
    let lo = n / 10;
    let hi = (9 * n).div_ceil(10);
    if hi < lo + 2 {
        return None;
    }
    let spacing = (levels[hi - 1] - levels[lo]) / (hi - 1 - lo) as f64;
    (spacing > 0.0).then_some(spacing)
}

/// Unitary evolution `U_t = W e^{-iDt} W†` with random eigenvectors `W`.
#[derive(Clone, Debug)]
pub struct StructuredEvolution {
    pub eigvecs: ComplexMatrix,
    pub levels: Vec<f64>,
}

impl StructuredEvolution {
    pub fn new(eigvecs: ComplexMatrix, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != eigvecs.dim() {
            return Err(Error::DimensionMismatch {
                expected: eigvecs.dim(),
                found: levels.len(),
            });
        }
        Ok(Self { eigvecs, levels })
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// `W diag(e^{-i E_j t}) W†`; exactly the identity at `t = 0`.
    pub fn evolve(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        if t == 0.0 {
            return ComplexMatrix::identity(n);
        }
        let w = &self.eigvecs;
        let phases: Vec<Complex64> = self
            .levels
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| w[(i, k)] * phases[k] * w[(j, k)].conj())
                    .sum();
            }
        }
        out
    }
}

/// Haar eigenvectors plus one spectrum draw from `ensemble`.
pub fn structured_evolution(
    ensemble: &SpectrumEnsemble,
    rng: &mut RngHandle,
) -> Result<StructuredEvolution> {
    let w = haar_unitary(ensemble.dim, rng);
    let levels = sample_spectrum(ensemble, rng)?;
    StructuredEvolution::new(w, levels)
}

/// `f(t) = (1/d) Σ_j e^{-i E_j t}`. `f(0) = 1` exactly; NaN for an empty spectrum.
pub fn level_transform_f(levels: &[f64], t: f64) -> Complex64 {
    let sum: Complex64 = levels
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * t))
        .sum();
    sum / levels.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{hs_norm, ComplexMatrix};

    #[test]
    fn same_seed_same_stream_is_reproducible() {
        let a = ginibre(4, &mut RngHandle::new(42));
        let b = ginibre(4, &mut RngHandle::new(42));
        assert_eq!(a, b);
        let c = ginibre(4, &mut RngHandle::with_stream(42, 1));
        assert_ne!(a, c);
        let root = RngHandle::new(42);
        assert_eq!(ginibre(4, &mut root.derive(1)), c);
    }

    #[test]
    fn ginibre_moments() {
        let mut rng = RngHandle::new(1);
        let n = 100_000;
        let (mut sum, mut sum_sq) = (Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let z = ginibre(1, &mut rng)[(0, 0)];
            sum += z;
            sum_sq += z.norm_sqr();
        }
        let nf = n as f64;
        // each part has unit variance, so the standard error of the mean is 1/sqrt(n)
        let sigma_mean = 1.0 / nf.sqrt();
        assert!((sum.re / nf).abs() < 4.0 * sigma_mean);
        assert!((sum.im / nf).abs() < 4.0 * sigma_mean);
        // |z|^2 is exponential with mean 2 and variance 4
        let mean_sq = sum_sq / nf;
        assert!((mean_sq - 2.0).abs() < 4.0 * 2.0 / nf.sqrt(), "{mean_sq}");
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = RngHandle::new(2);
        for d in 1..=8 {
            for _ in 0..50 {
                let u = haar_unitary(d, &mut rng);
                assert!(u.unitarity_residual() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_first_moments() {
        let mut rng = RngHandle::new(3);
        let (d, n) = (4, 100_000);
        let mut sq = [0.0; 16];
        let mut sq2 = [0.0; 16];
        let mut lin = [Complex64::new(0.0, 0.0); 16];
        for _ in 0..n {
            let u = haar_unitary(d, &mut rng);
            for (k, z) in u.as_slice().iter().enumerate() {
                sq[k] += z.norm_sqr();
                sq2[k] += z.norm_sqr().powi(2);
                lin[k] += z;
            }
        }
        let nf = n as f64;
        for k in 0..16 {
            let mean = sq[k] / nf;
            let var = sq2[k] / nf - mean * mean;
            let se = (var / nf).sqrt();
            assert!((mean - 0.25).abs() < 4.0 * se, "entry {k}: {mean}");
            // Var(Re U_ij) = 1/(2d)
            let se_lin = (1.0 / (2.0 * d as f64) / nf).sqrt();
            assert!((lin[k].re / nf).abs() < 4.0 * se_lin);
            assert!((lin[k].im / nf).abs() < 4.0 * se_lin);
        }
    }

    #[test]
    fn haar_left_invariance_of_second_moments() {
        let (d, n) = (3, 10_000);
        let v = haar_unitary(d, &mut RngHandle::new(99));
        let mut plain = RngHandle::new(4);
        let mut shifted = RngHandle::new(5);
        let mut a = vec![Vec::with_capacity(n); d * d];
        let mut b = vec![Vec::with_capacity(n); d * d];
        for _ in 0..n {
            let u = haar_unitary(d, &mut plain);
            let vu = v.matmul(&haar_unitary(d, &mut shifted));
            for k in 0..d * d {
                a[k].push(u.as_slice()[k].norm_sqr());
                b[k].push(vu.as_slice()[k].norm_sqr());
            }
        }
        for k in 0..d * d {
            let (ma, va) = mean_var(&a[k]);
            let (mb, vb) = mean_var(&b[k]);
            let se = ((va + vb) / n as f64).sqrt();
            assert!((ma - mb).abs() < 5.0 * se);
        }
    }

    #[test]
    fn haar_weingarten_moments() {
        // E|U_11|^4 = 2/(d(d+1)), E[U_11 U_22 conj(U_12 U_21)] = -1/(d(d²-1))
        let (d, n) = (3, 100_000);
        let df = d as f64;
        let mut rng = RngHandle::new(6);
        let mut quartic = Vec::with_capacity(n);
        let mut cross = Vec::with_capacity(n);
        for _ in 0..n {
            let u = haar_unitary(d, &mut rng);
            quartic.push(u[(0, 0)].norm_sqr().powi(2));
            cross.push((u[(0, 0)] * u[(1, 1)] * (u[(0, 1)] * u[(1, 0)]).conj()).re);
        }
        let (m4, v4) = mean_var(&quartic);
        assert!(
            (m4 - 2.0 / (df * (df + 1.0))).abs() < 4.0 * (v4 / n as f64).sqrt(),
            "{m4}"
        );
        let (mc, vc) = mean_var(&cross);
        let target = -1.0 / (df * (df * df - 1.0));
        assert!(
            (mc - target).abs() < 4.0 * (vc / n as f64).sqrt(),
            "{mc} vs {target}"
        );
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn explicit_spectrum_passthrough() {
        let e = SpectrumEnsemble::explicit(vec![0.0, 1.0, 2.0]);
        assert_eq!(
            sample_spectrum(&e, &mut RngHandle::new(0)).unwrap(),
            vec![0.0, 1.0, 2.0]
        );
    }

    #[test]
    fn explicit_spectrum_requires_levels() {
        let e = SpectrumEnsemble {
            kind: SpectrumKind::Explicit,
            dim: 3,
            mean_spacing: 1.0,
            explicit_levels: None,
        };
        assert!(matches!(
            sample_spectrum(&e, &mut RngHandle::new(0)),
            Err(Error::MissingLevels { dim: 3, found: 0 })
        ));
    }

    #[test]
    fn poisson_spacings_are_exponential() {
        let levels =
            sample_spectrum(&SpectrumEnsemble::poisson(1000), &mut RngHandle::new(6)).unwrap();
        let s: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
        let (m, v) = mean_var(&s);
        assert!((m - 1.0).abs() < 0.15, "{m}");
        // exponential: variance equals mean squared
        assert!((v / (m * m) - 1.0).abs() < 0.25, "{v}");
    }

    #[test]
    fn gue_suppresses_small_spacings() {
        let mut rng = RngHandle::new(7);
        let (mut small, mut total) = (0usize, 0usize);
        for _ in 0..20 {
            let levels = sample_spectrum(&SpectrumEnsemble::gue(64), &mut rng).unwrap();
            let n = levels.len();
            for w in levels[n / 10..(9 * n).div_ceil(10)].windows(2) {
                total += 1;
                if w[1] - w[0] < 0.1 {
                    small += 1;
                }
            }
        }
        let frac = small as f64 / total as f64;
        // Poisson would give 1 - e^{-0.1} ≈ 0.095
        assert!(frac < 0.02, "{frac}");
    }

    #[test]
    fn spectra_are_sorted() {
        let mut rng = RngHandle::new(8);
        for e in [SpectrumEnsemble::poisson(10), SpectrumEnsemble::gue(10)] {
            let levels = sample_spectrum(&e, &mut rng).unwrap();
            assert_eq!(levels.len(), 10);
            assert!(levels.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn evolution_group_properties() {
        let mut rng = RngHandle::new(9);
        let se = structured_evolution(&SpectrumEnsemble::gue(4), &mut rng).unwrap();
        assert_eq!(se.evolve(0.0), ComplexMatrix::identity(4));
        let (t, s) = (0.7, -1.3);
        let prod = se.evolve(t).matmul(&se.evolve(s));
        assert!(prod.max_abs_diff(&se.evolve(t + s)) < 1e-10);
        assert!(se.evolve(t).adjoint().max_abs_diff(&se.evolve(-t)) < 1e-12);
        assert!(se.evolve(1e5).unitarity_residual() < 1e-10);
        let x = ginibre(4, &mut rng);
        let ux = se.evolve(2.5).matmul(&x);
        assert!((hs_norm(&ux) - hs_norm(&x)).abs() < 1e-10);
    }

    #[test]
    fn level_transform_values() {
        assert_eq!(
            level_transform_f(&[0.3, 1.7, -2.0], 0.0),
            Complex64::new(1.0, 0.0)
        );
        let f = level_transform_f(&[0.0, std::f64::consts::PI], 1.0);
        assert!(f.norm() < 1e-15);
        let mut rng = RngHandle::new(10);
        for _ in 0..100 {
            let levels: Vec<f64> = (0..5).map(|_| rng.standard_normal() * 3.0).collect();
            let t = rng.uniform() * 20.0 - 10.0;
            assert!(level_transform_f(&levels, t).norm() <= 1.0 + 1e-15);
        }
    }
}
