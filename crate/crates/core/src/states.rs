//! Bipartite density matrices on `H_S ⊗ H_E`.

use num_complex::Complex64;

use crate::matcore::{
    eig_hermitian, hs_norm_sqr, partial_trace_env, partial_trace_sys, scaled_tol, tensor,
    ComplexMatrix, STRUCTURE_TOL,
};
use crate::randmat::{ginibre_rect, haar_unitary, RngHandle};
use crate::{Error, Result};

/// Schmidt coefficients at or below this value are dropped.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Density matrix of a system `S` and environment `E`.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    d_s: usize,
    d_e: usize,
    rho: ComplexMatrix,
}

impl BipartiteState {
    /// Validates Hermiticity, unit trace and positivity (all to `1e-10`).
    pub fn new(rho: ComplexMatrix, d_s: usize, d_e: usize) -> Result<Self> {
        if d_s == 0 || d_e == 0 || rho.dim() != d_s * d_e {
            return Err(Error::DimensionMismatch {
                expected: d_s * d_e,
                found: rho.dim(),
            });
        }
        let residual = rho.hermiticity_residual();
        if residual > STRUCTURE_TOL {
            return Err(Error::NotHermitian { residual });
        }
        let rho = rho.hermitian_part();
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = eig_hermitian(&rho)?.eigenvalues[0];
        if min_eig < -STRUCTURE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { d_s, d_e, rho })
    }

    /// Maximally mixed state `I / (d_S d_E)`.
    pub fn maximally_mixed(d_s: usize, d_e: usize) -> Self {
        let d = d_s * d_e;
        Self {
            d_s,
            d_e,
            rho: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    /// `ρ_S ⊗ ρ_E`.
    pub fn product(rho_s: &ComplexMatrix, rho_e: &ComplexMatrix) -> Result<Self> {
        Self::new(tensor(rho_s, rho_e), rho_s.dim(), rho_e.dim())
    }

    #[inline]
    pub fn d_s(&self) -> usize {
        self.d_s
    }

    #[inline]
    pub fn d_e(&self) -> usize {
        self.d_e
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d_s * self.d_e
    }

    #[inline]
    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> ComplexMatrix {
        self.rho
    }

    /// `ρ_S = Tr_E ρ`.
    pub fn marginal_system(&self) -> ComplexMatrix {
        partial_trace_env(&self.rho, self.d_s, self.d_e)
            .expect("dimensions checked at construction")
    }

    /// `ρ_E = Tr_S ρ`.
    pub fn marginal_env(&self) -> ComplexMatrix {
        partial_trace_sys(&self.rho, self.d_s, self.d_e)
            .expect("dimensions checked at construction")
    }

    /// Applies `u ρ u†` for a global unitary `u`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let rho = crate::matcore::conj_by_unitary(u, &self.rho)?;
        Self::new(rho, self.d_s, self.d_e)
    }
}

/// `Ψ = Σ_i λ_i |φ_i⟩ ⊗ |χ_i⟩` with `λ` descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    /// `d_S` rows, one column per retained coefficient (row-major `d_S x r`).
    pub system_vectors: Vec<Vec<Complex64>>,
    pub environment_vectors: Vec<Vec<Complex64>>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// `Σ_i λ_i |φ_i⟩ ⊗ |χ_i⟩`.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let d_s = self.system_vectors.first().map_or(0, Vec::len);
        let d_e = self.environment_vectors.first().map_or(0, Vec::len);
        let mut out = vec![Complex64::new(0.0, 0.0); d_s * d_e];
        for ((lambda, phi), chi) in self
            .coefficients
            .iter()
            .zip(&self.system_vectors)
            .zip(&self.environment_vectors)
        {
            for i in 0..d_s {
                for k in 0..d_e {
                    out[i * d_e + k] += phi[i] * chi[k] * *lambda;
                }
            }
        }
        out
    }
}

fn check_pure(psi: &[Complex64], d_s: usize, d_e: usize) -> Result<()> {
    if d_s == 0 || d_e == 0 || psi.len() != d_s * d_e {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_e,
            found: psi.len(),
        });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > STRUCTURE_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `|ψ⟩⟨ψ|` for a normalized vector.
pub fn from_pure(psi: &[Complex64], d_s: usize, d_e: usize) -> Result<BipartiteState> {
    check_pure(psi, d_s, d_e)?;
    let rho = ComplexMatrix::outer(psi, psi)?;
    Ok(BipartiteState {
        d_s,
        d_e,
        rho: rho.hermitian_part(),
    })
}

/// Schmidt decomposition through the eigensystem of the `d_S x d_S` Gram
/// matrix `C C†` of the reshaped amplitudes `C[i][k] = ψ[i d_E + k]`.
///
/// Coefficients are taken as `‖Cᵀ φ_i*‖` rather than square roots of Gram
/// eigenvalues, which keeps small coefficients accurate to rounding error.
pub fn schmidt(psi: &[Complex64], d_s: usize, d_e: usize) -> Result<SchmidtDecomposition> {
    check_pure(psi, d_s, d_e)?;
    let coeff = |i: usize, k: usize| psi[i * d_e + k];

    let mut gram = ComplexMatrix::zeros(d_s);
    for i in 0..d_s {
        for j in 0..d_s {
            gram[(i, j)] = (0..d_e).map(|k| coeff(i, k) * coeff(j, k).conj()).sum();
        }
    }
    let es = eig_hermitian(&gram.hermitian_part())?;

    let mut coefficients = Vec::new();
    let mut system_vectors = Vec::new();
    let mut environment_vectors: Vec<Vec<Complex64>> = Vec::new();
    for idx in (0..d_s).rev() {
        let phi = es.eigenvectors.column(idx);
        let mut chi: Vec<Complex64> = (0..d_e)
            .map(|k| (0..d_s).map(|m| phi[m].conj() * coeff(m, k)).sum())
            .collect();
        let lambda = chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if lambda <= SCHMIDT_CUTOFF {
            continue;
        }
        chi.iter_mut().for_each(|z| *z /= lambda);
        // Re-orthogonalize against the larger-coefficient vectors.
        for prev in &environment_vectors {
            let overlap: Complex64 = prev.iter().zip(&chi).map(|(p, c)| p.conj() * c).sum();
            for (c, p) in chi.iter_mut().zip(prev) {
                *c -= overlap * p;
            }
        }
        let renorm = chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        chi.iter_mut().for_each(|z| *z /= renorm);

        coefficients.push(lambda);
        system_vectors.push(phi);
        environment_vectors.push(chi);
    }

    // The eigensolver orders by Gram eigenvalue; reorder by computed coefficient.
    let mut order: Vec<usize> = (0..coefficients.len()).collect();
    order.sort_by(|&a, &b| coefficients[b].total_cmp(&coefficients[a]));
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&i| coefficients[i]).collect(),
        system_vectors: order.iter().map(|&i| system_vectors[i].clone()).collect(),
        environment_vectors: order
            .iter()
            .map(|&i| environment_vectors[i].clone())
            .collect(),
    })
}

/// `Tr ρ²`.
pub fn purity(s: &BipartiteState) -> f64 {
    hs_norm_sqr(&s.rho)
}

/// Generalized concurrence `C = sqrt(2 (1 - Σ λ_i⁴))` of a pure state.
pub fn concurrence_pure(psi: &[Complex64], d_s: usize, d_e: usize) -> Result<f64> {
    let sd = schmidt(psi, d_s, d_e)?;
    let sum4: f64 = sd.coefficients.iter().map(|l| l.powi(4)).sum();
    Ok((2.0 * (1.0 - sum4)).max(0.0).sqrt())
}

/// Classically correlated state `Σ_ij p_ij |a_i⟩⟨a_i| ⊗ |b_j⟩⟨b_j|` where
/// `a_i`, `b_j` are the columns of `system_basis` and `env_basis`.
pub fn classical_state(
    p: &[Vec<f64>],
    system_basis: &ComplexMatrix,
    env_basis: &ComplexMatrix,
) -> Result<BipartiteState> {
    let (d_s, d_e) = (system_basis.dim(), env_basis.dim());
    if p.len() != d_s || p.iter().any(|row| row.len() != d_e) {
        return Err(Error::InvalidProbabilities(format!(
            "table must be {d_s} x {d_e}"
        )));
    }
    if let Some(bad) = p.iter().flatten().find(|&&x| x.is_nan() || x < 0.0) {
        return Err(Error::InvalidProbabilities(format!(
            "negative or non-finite entry {bad}"
        )));
    }
    let total: f64 = p.iter().flatten().sum();
    if (total - 1.0).abs() > STRUCTURE_TOL {
        return Err(Error::InvalidProbabilities(format!(
            "entries sum to {total}, expected 1"
        )));
    }
    for basis in [system_basis, env_basis] {
        let residual = basis.unitarity_residual();
        if residual > scaled_tol(STRUCTURE_TOL, basis.dim() as f64) {
            return Err(Error::NotUnitary { residual });
        }
    }

    let projectors = |basis: &ComplexMatrix| -> Vec<ComplexMatrix> {
        (0..basis.dim())
            .map(|i| {
                let col = basis.column(i);
                ComplexMatrix::outer(&col, &col).expect("equal lengths")
            })
            .collect()
    };
    let sys = projectors(system_basis);
    let env = projectors(env_basis);
    let mut rho = ComplexMatrix::zeros(d_s * d_e);
    for (i, row) in p.iter().enumerate() {
        for (j, &pij) in row.iter().enumerate() {
            if pij > 0.0 {
                rho += &tensor(&sys[i], &env[j]).scale_real(pij);
            }
        }
    }
    BipartiteState::new(rho, d_s, d_e)
}

/// Haar-random unit vector in `C^{d_S d_E}` (first column of a Haar unitary).
pub fn random_pure(d_s: usize, d_e: usize, rng: &mut RngHandle) -> Vec<Complex64> {
    haar_unitary(d_s * d_e, rng).column(0)
}

/// Hilbert-Schmidt-ensemble state `G G† / Tr(G G†)` with `G` a
/// `d x rank` Ginibre block.
pub fn random_mixed(
    d_s: usize,
    d_e: usize,
    rank: usize,
    rng: &mut RngHandle,
) -> Result<BipartiteState> {
    let d = d_s * d_e;
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let g = ginibre_rect(d, rank, rng);
    let mut rho = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            rho[(i, j)] = (0..rank)
                .map(|k| g[i * rank + k] * g[j * rank + k].conj())
                .sum();
        }
    }
    let tr = rho.trace().re;
    let rho = rho.scale_real(1.0 / tr).hermitian_part();
    BipartiteState::new(rho, d_s, d_e)
}

/// Random classically correlated state: a random probability table in
/// Haar-random local bases.
pub fn random_classical(d_s: usize, d_e: usize, rng: &mut RngHandle) -> Result<BipartiteState> {
    let mut p: Vec<Vec<f64>> = (0..d_s)
        .map(|_| (0..d_e).map(|_| rng.exponential(1.0)).collect())
        .collect();
    let total: f64 = p.iter().flatten().sum();
    p.iter_mut().flatten().for_each(|x| *x /= total);
    let a = haar_unitary(d_s, rng);
    let b = haar_unitary(d_e, rng);
    classical_state(&p, &a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::hs_norm;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn partially_entangled() -> Vec<Complex64> {
        vec![c(0.8f64.sqrt()), c(0.0), c(0.0), c(0.2f64.sqrt())]
    }

    fn bell() -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(h), c(0.0), c(0.0), c(h)]
    }

    #[test]
    fn pure_product_state() {
        let s = from_pure(&[c(1.0), c(0.0), c(0.0), c(0.0)], 2, 2).unwrap();
        assert_eq!(
            s.rho(),
            &ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0])
        );
        assert!((purity(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_bell_marginal() {
        let s = from_pure(&bell(), 2, 2).unwrap();
        let m = s.marginal_system();
        assert!(m.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        assert!((purity(&s) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_partial_marginal() {
        let s = from_pure(&partially_entangled(), 2, 2).unwrap();
        let m = s.marginal_system();
        assert!(m.max_abs_diff(&ComplexMatrix::from_real_diag(&[0.8, 0.2])) < 1e-15);
    }

    #[test]
    fn unnormalized_vector_rejected() {
        let psi = [c(1.0), c(1.0), c(0.0), c(0.0)];
        assert!(matches!(
            from_pure(&psi, 2, 2),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            schmidt(&psi, 2, 2),
            Err(Error::NotNormalized { .. })
        ));
        assert!(concurrence_pure(&psi, 2, 2).is_err());
    }

    #[test]
    fn schmidt_examples() {
        let sd = schmidt(&[c(0.0), c(1.0), c(0.0), c(0.0)], 2, 2).unwrap();
        assert_eq!(sd.rank(), 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-15);

        let sd = schmidt(&bell(), 2, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(sd.rank(), 2);
        assert!(sd.coefficients.iter().all(|l| (l - h).abs() < 1e-14));

        let sd = schmidt(&partially_entangled(), 2, 2).unwrap();
        assert!((sd.coefficients[0] - 0.8f64.sqrt()).abs() < 1e-14);
        assert!((sd.coefficients[1] - 0.2f64.sqrt()).abs() < 1e-14);
    }

    fn check_orthonormal(vectors: &[Vec<Complex64>]) {
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(target)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn schmidt_invariants_on_random_states() {
        let mut rng = RngHandle::new(11);
        for &(d_s, d_e) in &[(2, 2), (2, 3), (3, 2), (3, 4), (4, 3)] {
            for _ in 0..20 {
                let psi = random_pure(d_s, d_e, &mut rng);
                let sd = schmidt(&psi, d_s, d_e).unwrap();
                let back = sd.reconstruct();
                let err: f64 = back
                    .iter()
                    .zip(&psi)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(err < 1e-10);
                check_orthonormal(&sd.system_vectors);
                check_orthonormal(&sd.environment_vectors);
                let total: f64 = sd.coefficients.iter().map(|l| l * l).sum();
                assert!((total - 1.0).abs() < 1e-10);
                assert!(sd.coefficients.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn schmidt_of_near_product_state() {
        // tiny second coefficient, well below sqrt(machine epsilon)
        let eps: f64 = 1e-9;
        let a = (1.0 - eps * eps).sqrt();
        let psi = [c(a), c(0.0), c(0.0), c(eps)];
        let sd = schmidt(&psi, 2, 2).unwrap();
        assert_eq!(sd.rank(), 2);
        assert!((sd.coefficients[1] - eps).abs() < 1e-15);
        check_orthonormal(&sd.environment_vectors);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&BipartiteState::maximally_mixed(2, 2)) - 0.25).abs() < 1e-15);
        let s = BipartiteState::new(ComplexMatrix::from_real_diag(&[0.8, 0.0, 0.0, 0.2]), 2, 2)
            .unwrap();
        assert!((purity(&s) - 0.68).abs() < 1e-15);
    }

    #[test]
    fn purity_routes_agree() {
        let mut rng = RngHandle::new(12);
        for rank in 1..=6 {
            let s = random_mixed(2, 3, rank, &mut rng).unwrap();
            let via_product = s.rho().matmul(s.rho()).trace().re;
            assert!((purity(&s) - via_product).abs() < 1e-12);
            let p = purity(&s);
            assert!((1.0 / 6.0 - 1e-12..=1.0 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn concurrence_examples() {
        assert!(concurrence_pure(&[c(0.0), c(1.0), c(0.0), c(0.0)], 2, 2).unwrap() < 1e-15);
        assert!((concurrence_pure(&bell(), 2, 2).unwrap() - 1.0).abs() < 1e-14);
        assert!((concurrence_pure(&partially_entangled(), 2, 2).unwrap() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn classical_state_examples() {
        let id = ComplexMatrix::identity(2);
        let s = classical_state(&[vec![0.7, 0.0], vec![0.0, 0.3]], &id, &id).unwrap();
        assert!(
            s.rho()
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[0.7, 0.0, 0.0, 0.3]))
                < 1e-15
        );

        let s = classical_state(&[vec![0.0, 1.0], vec![0.0, 0.0]], &id, &id).unwrap();
        assert!((purity(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classical_state_rejects_bad_tables() {
        let id = ComplexMatrix::identity(2);
        assert!(matches!(
            classical_state(&[vec![0.7, 0.0], vec![0.0, 0.2]], &id, &id),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            classical_state(&[vec![1.2, -0.2], vec![0.0, 0.0]], &id, &id),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(matches!(
            classical_state(&[vec![1.0, 0.0]], &id, &id),
            Err(Error::InvalidProbabilities(_))
        ));
        let not_unitary = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(classical_state(&[vec![0.5, 0.0], vec![0.0, 0.5]], &not_unitary, &id).is_err());
    }

    #[test]
    fn invalid_density_matrices_rejected() {
        let not_unit_trace = ComplexMatrix::from_real_diag(&[0.5, 0.0, 0.0, 0.2]);
        assert!(matches!(
            BipartiteState::new(not_unit_trace, 2, 2),
            Err(Error::InvalidState(_))
        ));
        let negative = ComplexMatrix::from_real_diag(&[1.2, -0.2, 0.0, 0.0]);
        assert!(matches!(
            BipartiteState::new(negative, 2, 2),
            Err(Error::InvalidState(_))
        ));
        assert!(BipartiteState::new(ComplexMatrix::identity(4), 2, 3).is_err());
    }

    #[test]
    fn random_mixed_rank_one_is_pure() {
        let mut rng = RngHandle::new(13);
        for _ in 0..10 {
            let s = random_mixed(2, 3, 1, &mut rng).unwrap();
            assert!((purity(&s) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_mixed_full_rank_mean_purity() {
        let mut rng = RngHandle::new(14);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| purity(&random_mixed(2, 2, 4, &mut rng).unwrap()))
            .sum::<f64>()
            / n as f64;
        assert!(mean > 0.25 && mean < 1.0, "{mean}");
    }

    #[test]
    fn random_mixed_rejects_rank() {
        let mut rng = RngHandle::new(15);
        assert!(matches!(
            random_mixed(2, 2, 0, &mut rng),
            Err(Error::InvalidRank { rank: 0, dim: 4 })
        ));
        assert!(random_mixed(2, 2, 5, &mut rng).is_err());
    }

    #[test]
    fn random_pure_is_normalized() {
        let mut rng = RngHandle::new(16);
        let psi = random_pure(3, 3, &mut rng);
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-12);
        let s = from_pure(&psi, 3, 3).unwrap();
        assert!((hs_norm(s.rho()) - 1.0).abs() < 1e-12);
    }
}
