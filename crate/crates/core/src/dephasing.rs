//! Local dephasing in the eigenbasis of the open-system marginal and the
//! resulting discord measure.
//!
//! For a state `ρ` with marginal `ρ_S = Σ_μ p_μ π_μ`, the local map is
//! `Φ(A) = Σ_μ π_μ A π_μ` and the dephased total state is
//! `ρ' = Σ_μ (π_μ ⊗ I) ρ (π_μ ⊗ I)`. `δ(ρ) = ‖ρ − ρ'‖` vanishes exactly when
//! `ρ` is a fixed point of the dephasing, i.e. carries only classical
//! correlations.
//!
//! When `ρ_S` has a degenerate spectrum the eigenbasis is not unique. The
//! basis used is then the deterministic one produced by
//! [`eig_hermitian`](crate::matcore::eig_hermitian) and
//! [`DephasingBasis::degenerate`] is set.

use num_complex::Complex64;

use crate::matcore::{eig_hermitian, hs_norm, tensor, ComplexMatrix, DEGENERACY_GAP};
use crate::states::{purity, BipartiteState};
use crate::{Error, Result};

/// Default threshold on `δ(ρ)` for [`is_classical`].
pub const CLASSICALITY_TOL: f64 = 1e-8;

/// Complete set of rank-one projectors onto the eigenvectors of `ρ_S`,
/// ordered by ascending eigenvalue.
#[derive(Clone, Debug)]
pub struct DephasingBasis {
    pub projectors: Vec<ComplexMatrix>,
    /// Eigenvectors as columns, matching `projectors`.
    pub vectors: ComplexMatrix,
    pub source_eigenvalues: Vec<f64>,
    /// Set when two eigenvalues of `ρ_S` are closer than `1e-9`.
    pub degenerate: bool,
}

impl DephasingBasis {
    /// Basis built from the columns of a unitary matrix.
    pub fn from_vectors(vectors: ComplexMatrix) -> Self {
        let projectors = (0..vectors.dim())
            .map(|k| {
                let col = vectors.column(k);
                ComplexMatrix::outer(&col, &col).expect("equal lengths")
            })
            .collect();
        Self {
            projectors,
            vectors,
            source_eigenvalues: Vec::new(),
            degenerate: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }
}

pub fn eigenbasis_of_marginal(s: &BipartiteState) -> Result<DephasingBasis> {
    let es = eig_hermitian(&s.marginal_system())?;
    let degenerate = es
        .eigenvalues
        .windows(2)
        .any(|w| w[1] - w[0] < DEGENERACY_GAP);
    let mut basis = DephasingBasis::from_vectors(es.eigenvectors);
    basis.source_eigenvalues = es.eigenvalues;
    basis.degenerate = degenerate;
    Ok(basis)
}

/// `Φ(A) = Σ_μ π_μ A π_μ` on the open system.
pub fn dephase_local(a: &ComplexMatrix, basis: &DephasingBasis) -> Result<ComplexMatrix> {
    if a.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: a.dim(),
        });
    }
    let mut out = ComplexMatrix::zeros(a.dim());
    for (k, pi) in basis.projectors.iter().enumerate() {
        let v = basis.vectors.column(k);
        let av = a.mul_vec(&v);
        let weight: Complex64 = v.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
        out += &pi.scale(weight);
    }
    Ok(out)
}

/// `(Φ ⊗ I) ρ` as a raw matrix.
pub fn dephase_total_matrix(
    rho: &ComplexMatrix,
    d_s: usize,
    d_e: usize,
    basis: &DephasingBasis,
) -> Result<ComplexMatrix> {
    if basis.dim() != d_s || rho.dim() != d_s * d_e {
        return Err(Error::DimensionMismatch {
            expected: d_s,
            found: basis.dim(),
        });
    }
    let id_e = ComplexMatrix::identity(d_e);
    let mut out = ComplexMatrix::zeros(d_s * d_e);
    for pi in &basis.projectors {
        let big = tensor(pi, &id_e);
        out += &big.matmul(rho).matmul(&big);
    }
    Ok(out.hermitian_part())
}

/// `ρ' = Σ_μ Π_μ ρ Π_μ` with `Π_μ = π_μ ⊗ I`.
pub fn dephase_total(s: &BipartiteState, basis: &DephasingBasis) -> Result<BipartiteState> {
    let rho = dephase_total_matrix(s.rho(), s.d_s(), s.d_e(), basis)?;
    BipartiteState::new(rho, s.d_s(), s.d_e())
}

/// Everything computed on the way to `δ(ρ)`.
#[derive(Clone, Debug)]
pub struct DiscordReport {
    pub basis: DephasingBasis,
    pub dephased: BipartiteState,
    /// `‖ρ − ρ'‖`.
    pub delta: f64,
    /// `P(ρ) − P(ρ')`, which equals `δ²`.
    pub purity_gap: f64,
    pub purity: f64,
    pub purity_dephased: f64,
}

impl DiscordReport {
    /// `sqrt(P(ρ) − P(ρ'))`, clamped at zero.
    pub fn delta_from_purities(&self) -> f64 {
        self.purity_gap.max(0.0).sqrt()
    }
}

pub fn discord_report(s: &BipartiteState) -> Result<DiscordReport> {
    let basis = eigenbasis_of_marginal(s)?;
    let dephased = dephase_total(s, &basis)?;
    let delta = hs_norm(&(s.rho() - dephased.rho()));
    let p = purity(s);
    let p_deph = purity(&dephased);
    let purity_gap = p - p_deph;
    debug_assert!(
        (delta * delta - purity_gap).abs() <= 1e-10,
        "norm and purity routes disagree: {} vs {}",
        delta * delta,
        purity_gap
    );
    Ok(DiscordReport {
        basis,
        dephased,
        delta,
        purity_gap,
        purity: p,
        purity_dephased: p_deph,
    })
}

/// `δ(ρ) = ‖ρ − (Φ ⊗ I)ρ‖`.
pub fn discord_delta(s: &BipartiteState) -> Result<f64> {
    Ok(discord_report(s)?.delta)
}

/// True when `δ(ρ) ≤ tol`, i.e. `ρ` is invariant under the local dephasing.
pub fn is_classical(s: &BipartiteState, tol: f64) -> Result<bool> {
    Ok(discord_delta(s)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{conj_by_unitary, partial_trace_env, partial_trace_sys};
    use crate::randmat::{haar_unitary, RngHandle};
    use crate::states::{
        classical_state, concurrence_pure, from_pure, random_classical, random_mixed, random_pure,
    };

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn partially_entangled() -> BipartiteState {
        from_pure(&[c(0.8f64.sqrt()), c(0.0), c(0.0), c(0.2f64.sqrt())], 2, 2).unwrap()
    }

    fn bell() -> BipartiteState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        from_pure(&[c(h), c(0.0), c(0.0), c(h)], 2, 2).unwrap()
    }

    /// 0.5 |0><0| ⊗ |0><0| + 0.5 |+><+| ⊗ |1><1|
    fn separable_discordant() -> BipartiteState {
        let p0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let plus = ComplexMatrix::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let rho = &tensor(&p0, &p0).scale_real(0.5) + &tensor(&plus, &p1).scale_real(0.5);
        BipartiteState::new(rho, 2, 2).unwrap()
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn basis_of_diagonal_marginal() {
        let id = ComplexMatrix::identity(2);
        let s = classical_state(&[vec![0.7, 0.0], vec![0.0, 0.3]], &id, &id).unwrap();
        let basis = eigenbasis_of_marginal(&s).unwrap();
        assert!(!basis.degenerate);
        assert_eq!(basis.source_eigenvalues, vec![0.3, 0.7]);
        // ascending eigenvalue: |1> first
        assert!(
            basis.projectors[0].max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 1.0])) < 1e-15
        );
        assert!(
            basis.projectors[1].max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0])) < 1e-15
        );
    }

    #[test]
    fn basis_of_maximally_mixed_marginal_is_flagged() {
        let basis = eigenbasis_of_marginal(&bell()).unwrap();
        assert!(basis.degenerate);
        check_projector_invariants(&basis);
    }

    #[test]
    fn basis_of_nondiagonal_marginal() {
        let s = separable_discordant();
        let basis = eigenbasis_of_marginal(&s).unwrap();
        let rho_s = ComplexMatrix::from_real(2, &[0.75, 0.25, 0.25, 0.25]).unwrap();
        for (k, pi) in basis.projectors.iter().enumerate() {
            let lhs = rho_s.matmul(pi);
            let rhs = pi.scale_real(basis.source_eigenvalues[k]);
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }
        check_projector_invariants(&basis);
    }

    fn check_projector_invariants(basis: &DephasingBasis) {
        let n = basis.dim();
        let mut sum = ComplexMatrix::zeros(n);
        for (i, pi) in basis.projectors.iter().enumerate() {
            sum += pi;
            assert!((pi.trace() - c(1.0)).norm() < 1e-12);
            for (j, pj) in basis.projectors.iter().enumerate() {
                let prod = pi.matmul(pj);
                let target = if i == j {
                    pi.clone()
                } else {
                    ComplexMatrix::zeros(n)
                };
                assert!(prod.max_abs_diff(&target) < 1e-10);
            }
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
    }

    #[test]
    fn local_dephasing_examples() {
        let basis = DephasingBasis::from_vectors(ComplexMatrix::identity(2));
        let diag = ComplexMatrix::from_real_diag(&[0.3, 0.7]);
        assert_eq!(dephase_local(&diag, &basis).unwrap(), diag);
        assert!(hs_norm(&dephase_local(&pauli_x(), &basis).unwrap()) < 1e-15);
        assert!(dephase_local(&ComplexMatrix::identity(3), &basis).is_err());
    }

    #[test]
    fn local_dephasing_is_idempotent_and_trace_preserving() {
        let mut rng = RngHandle::new(21);
        for _ in 0..20 {
            let basis = DephasingBasis::from_vectors(haar_unitary(3, &mut rng));
            let a = crate::randmat::ginibre(3, &mut rng);
            let once = dephase_local(&a, &basis).unwrap();
            let twice = dephase_local(&once, &basis).unwrap();
            assert!(once.max_abs_diff(&twice) < 1e-14);
            assert!((once.trace() - a.trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn classical_state_is_fixed_point() {
        let mut rng = RngHandle::new(22);
        for _ in 0..50 {
            let s = random_classical(2, 3, &mut rng).unwrap();
            let basis = eigenbasis_of_marginal(&s).unwrap();
            let deph = dephase_total(&s, &basis).unwrap();
            assert!(deph.rho().max_abs_diff(s.rho()) < 1e-10);
            assert!(is_classical(&s, CLASSICALITY_TOL).unwrap());
        }
    }

    #[test]
    fn pure_state_dephases_onto_schmidt_basis() {
        let s = partially_entangled();
        let basis = eigenbasis_of_marginal(&s).unwrap();
        let deph = dephase_total(&s, &basis).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[0.8, 0.0, 0.0, 0.2]);
        assert!(deph.rho().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn dephasing_preserves_marginals_and_lowers_purity() {
        let mut rng = RngHandle::new(23);
        for &(d_s, d_e) in &[(2, 2), (2, 3), (3, 2)] {
            for rank in 1..=3 {
                let s = random_mixed(d_s, d_e, rank, &mut rng).unwrap();
                let basis = eigenbasis_of_marginal(&s).unwrap();
                let deph = dephase_total(&s, &basis).unwrap();
                let rs = partial_trace_env(s.rho(), d_s, d_e).unwrap();
                let rs2 = partial_trace_env(deph.rho(), d_s, d_e).unwrap();
                let re = partial_trace_sys(s.rho(), d_s, d_e).unwrap();
                let re2 = partial_trace_sys(deph.rho(), d_s, d_e).unwrap();
                assert!(rs.max_abs_diff(&rs2) < 1e-10);
                assert!(re.max_abs_diff(&re2) < 1e-10);
                assert!(purity(&deph) <= purity(&s) + 1e-12);
                let again = dephase_total(&deph, &basis).unwrap();
                assert!(again.rho().max_abs_diff(deph.rho()) < 1e-14);
            }
        }
    }

    #[test]
    fn dephase_total_rejects_wrong_basis() {
        let basis = DephasingBasis::from_vectors(ComplexMatrix::identity(3));
        assert!(dephase_total(&bell(), &basis).is_err());
    }

    #[test]
    fn delta_examples() {
        let rho_s = ComplexMatrix::from_real_diag(&[0.7, 0.3]);
        let rho_e = ComplexMatrix::from_real(2, &[0.5, 0.2, 0.2, 0.5]).unwrap();
        let product = BipartiteState::product(&rho_s, &rho_e).unwrap();
        assert!(discord_delta(&product).unwrap() < 1e-15);

        let report = discord_report(&partially_entangled()).unwrap();
        assert!((report.delta - 0.32f64.sqrt()).abs() < 1e-14);
        assert!((report.delta - 0.565685).abs() < 1e-6);
        assert!((report.purity_dephased - 0.68).abs() < 1e-14);

        // frozen from an independent numpy eigh evaluation: δ² = 0.125
        let d = discord_delta(&separable_discordant()).unwrap();
        assert!(d > 0.1);
        assert!((d - 0.125f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn classicality_examples() {
        assert!(!is_classical(&bell(), CLASSICALITY_TOL).unwrap());
        assert!((discord_delta(&bell()).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(is_classical(&BipartiteState::maximally_mixed(2, 3), CLASSICALITY_TOL).unwrap());
        let id = ComplexMatrix::identity(2);
        let s = classical_state(&[vec![0.6, 0.1], vec![0.0, 0.3]], &id, &id).unwrap();
        assert!(is_classical(&s, CLASSICALITY_TOL).unwrap());
    }

    #[test]
    fn purity_identity_on_random_states() {
        let mut rng = RngHandle::new(24);
        for _ in 0..100 {
            let rank = 1 + (rng.uniform() * 6.0) as usize;
            let s = random_mixed(2, 3, rank, &mut rng).unwrap();
            let r = discord_report(&s).unwrap();
            assert!((r.delta * r.delta - r.purity_gap).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_state_delta_is_concurrence_over_sqrt2() {
        let mut rng = RngHandle::new(25);
        for _ in 0..20 {
            let psi = random_pure(2, 3, &mut rng);
            let delta = discord_delta(&from_pure(&psi, 2, 3).unwrap()).unwrap();
            let conc = concurrence_pure(&psi, 2, 3).unwrap();
            assert!((delta - conc / 2f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn delta_invariant_under_basis_phases_and_env_unitaries() {
        let mut rng = RngHandle::new(26);
        for _ in 0..20 {
            let s = random_mixed(2, 3, 3, &mut rng).unwrap();
            let basis = eigenbasis_of_marginal(&s).unwrap();
            // phase diagonal in the marginal eigenbasis
            let phases: Vec<Complex64> = (0..2)
                .map(|_| Complex64::from_polar(1.0, rng.uniform() * 6.0))
                .collect();
            let v = &basis.vectors;
            let local = v
                .matmul(&ComplexMatrix::from_diag(&phases))
                .matmul(&v.adjoint());
            let u = tensor(&local, &haar_unitary(3, &mut rng));
            let moved = BipartiteState::new(conj_by_unitary(&u, s.rho()).unwrap(), 2, 3).unwrap();
            let d0 = discord_delta(&s).unwrap();
            let d1 = discord_delta(&moved).unwrap();
            assert!((d0 - d1).abs() < 1e-10);
        }
    }

    #[test]
    fn states_diagonal_in_marginal_basis_have_zero_delta() {
        let mut rng = RngHandle::new(27);
        for _ in 0..20 {
            let s = random_mixed(2, 2, 4, &mut rng).unwrap();
            let basis = eigenbasis_of_marginal(&s).unwrap();
            // Σ p_i π_i ⊗ σ_i with random environment states σ_i
            let mut rho = ComplexMatrix::zeros(4);
            let weights = [0.35, 0.65];
            for (pi, w) in basis.projectors.iter().zip(weights) {
                let sigma = random_mixed(1, 2, 2, &mut rng).unwrap();
                rho += &tensor(pi, sigma.rho()).scale_real(w);
            }
            let t = BipartiteState::new(rho, 2, 2).unwrap();
            assert!(discord_delta(&t).unwrap() < 1e-10);
        }
    }
}
