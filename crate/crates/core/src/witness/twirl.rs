//! The twirled map `Λ_AB(X) = ∫ dU  U†AU X U†BU` over the Haar measure.
//!
//! Unitary invariance forces `Λ_AB(X) = a Tr(X) I + b X` with
//!
//! ```text
//! a = (d Tr(BA) − Tr A Tr B) / (d (d² − 1))
//! b = (d Tr A Tr B − Tr(BA)) / (d (d² − 1))
//! ```
//!
//! Equivalently its Choi matrix `(Λ ⊗ I)|Ω⟩⟨Ω|` is isotropic,
//! `(a/d) I + b |Ω⟩⟨Ω|` with `|Ω⟩ = d^{-1/2} Σ_ω |ω⟩|ω⟩`, so that
//! `Tr ρ_Λ = a d + b` and `⟨Ω|ρ_Λ|Ω⟩ = a/d + b`.

use num_complex::Complex64;

use crate::matcore::{hs_norm, ComplexMatrix};
use crate::montecarlo::{estimate_matrix_mean, MatrixEstimate, MonteCarlo};
use crate::randmat::{haar_unitary, RngHandle};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwirlConstants {
    pub a: f64,
    pub b: f64,
}

impl TwirlConstants {
    /// `a Tr(X) I + b X`.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = x.scale_real(self.b);
        let shift = x.trace() * self.a;
        for i in 0..x.dim() {
            out[(i, i)] += shift;
        }
        out
    }

    /// `(a/d) I + b |Ω⟩⟨Ω|` on `C^d ⊗ C^d`.
    pub fn isotropic_choi(&self, d: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(d * d).scale_real(self.a / d as f64);
        out += &max_entangled_projector(d).scale_real(self.b);
        out
    }
}

fn check_pair(a_op: &ComplexMatrix, b_op: &ComplexMatrix) -> Result<usize> {
    if a_op.dim() != b_op.dim() {
        return Err(Error::DimensionMismatch {
            expected: a_op.dim(),
            found: b_op.dim(),
        });
    }
    Ok(a_op.dim())
}

/// Constants `a`, `b` for arbitrary `A`, `B`; complex when the traces are.
pub fn twirl_constants_complex(
    a_op: &ComplexMatrix,
    b_op: &ComplexMatrix,
) -> Result<(Complex64, Complex64)> {
    let d = check_pair(a_op, b_op)?;
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let df = d as f64;
    let tr_ba = b_op.matmul(a_op).trace();
    let tr_a_tr_b = a_op.trace() * b_op.trace();
    let denom = df * (df * df - 1.0);
    Ok((
        (tr_ba * df - tr_a_tr_b) / denom,
        (tr_a_tr_b * df - tr_ba) / denom,
    ))
}

/// Lemma constants for Hermitian or otherwise real-trace `A`, `B`.
pub fn twirl_constants(a_op: &ComplexMatrix, b_op: &ComplexMatrix) -> Result<TwirlConstants> {
    let (a, b) = twirl_constants_complex(a_op, b_op)?;
    Ok(TwirlConstants { a: a.re, b: b.re })
}

/// `a Tr(X) I + b X` with complex constants, valid for arbitrary `A`, `B`.
pub fn twirl_analytic(
    a_op: &ComplexMatrix,
    b_op: &ComplexMatrix,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let (a, b) = twirl_constants_complex(a_op, b_op)?;
    if x.dim() != a_op.dim() {
        return Err(Error::DimensionMismatch {
            expected: a_op.dim(),
            found: x.dim(),
        });
    }
    let mut out = x.scale(b);
    let shift = x.trace() * a;
    for i in 0..x.dim() {
        out[(i, i)] += shift;
    }
    Ok(out)
}

/// One sample `U†AU X U†BU`.
pub fn twirl_sample(
    u: &ComplexMatrix,
    a_op: &ComplexMatrix,
    b_op: &ComplexMatrix,
    x: &ComplexMatrix,
) -> ComplexMatrix {
    let ud = u.adjoint();
    let p = ud.matmul(a_op).matmul(u);
    let q = ud.matmul(b_op).matmul(u);
    p.matmul(x).matmul(&q)
}

/// Monte Carlo estimate of `Λ_AB(X)`.
pub fn twirl_mc(
    a_op: &ComplexMatrix,
    b_op: &ComplexMatrix,
    x: &ComplexMatrix,
    mc: &MonteCarlo,
    rng: &mut RngHandle,
) -> Result<MatrixEstimate> {
    let d = check_pair(a_op, b_op)?;
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.dim(),
        });
    }
    estimate_matrix_mean(mc, d, rng, |r| {
        let u = haar_unitary(d, r);
        Ok(twirl_sample(&u, a_op, b_op, x))
    })
}

/// `|Ω⟩⟨Ω|` with `|Ω⟩ = d^{-1/2} Σ_ω |ω⟩ ⊗ |ω⟩`.
pub fn max_entangled_projector(d: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d * d);
    let w = Complex64::new(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            out[(i * d + i, j * d + j)] = w;
        }
    }
    out
}

/// Choi matrix `(Λ ⊗ I)|Ω⟩⟨Ω| = (1/d) Σ_{ω,ω'} Λ(|ω⟩⟨ω'|) ⊗ |ω⟩⟨ω'|`.
pub fn choi_matrix<F>(map: F, d: usize) -> ComplexMatrix
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let mut out = ComplexMatrix::zeros(d * d);
    let inv_d = 1.0 / d as f64;
    for w in 0..d {
        for wp in 0..d {
            let mut unit = ComplexMatrix::zeros(d);
            unit[(w, wp)] = Complex64::new(1.0, 0.0);
            let image = map(&unit);
            for i in 0..d {
                for j in 0..d {
                    out[(i * d + w, j * d + wp)] = image[(i, j)] * inv_d;
                }
            }
        }
    }
    out
}

/// Outcome of comparing a sampled Choi matrix with the isotropic form.
#[derive(Clone, Debug)]
pub struct ChoiCheck {
    pub constants: TwirlConstants,
    pub choi: MatrixEstimate,
    /// `‖ρ_Λ − ((a/d) I + b|Ω⟩⟨Ω|)‖`.
    pub residual: f64,
    /// Expected size of the residual from sampling error alone.
    pub aggregate_error: f64,
    /// Sampled `Tr ρ_Λ`; the isotropic form predicts `a d + b`.
    pub trace: f64,
    /// Sampled `⟨Ω|ρ_Λ|Ω⟩`; the isotropic form predicts `a/d + b`.
    pub omega_element: f64,
}

impl ChoiCheck {
    pub fn passes(&self, k: f64) -> bool {
        self.residual <= k * self.aggregate_error + 1e-12
    }
}

/// Samples the Choi matrix of `Λ_AB` and compares it with the isotropic form
/// built from [`twirl_constants`].
///
/// For each Haar `U` the sampled map is `X ↦ P X Q` with `P = U†AU`,
/// `Q = U†BU`, and its image of `|ω⟩⟨ω'|` is the outer product of column `ω`
/// of `P` with row `ω'` of `Q`.
pub fn choi_isotropic_check(
    a_op: &ComplexMatrix,
    b_op: &ComplexMatrix,
    mc: &MonteCarlo,
    rng: &mut RngHandle,
) -> Result<ChoiCheck> {
    let d = check_pair(a_op, b_op)?;
    let constants = twirl_constants(a_op, b_op)?;
    let inv_d = 1.0 / d as f64;
    let choi = estimate_matrix_mean(mc, d * d, rng, |r| {
        let u = haar_unitary(d, r);
        let ud = u.adjoint();
        let p = ud.matmul(a_op).matmul(&u);
        let q = ud.matmul(b_op).matmul(&u);
        let mut sample = ComplexMatrix::zeros(d * d);
        for i in 0..d {
            for w in 0..d {
                let piw = p[(i, w)] * inv_d;
                for j in 0..d {
                    for wp in 0..d {
                        sample[(i * d + w, j * d + wp)] = piw * q[(wp, j)];
                    }
                }
            }
        }
        Ok(sample)
    })?;
    let target = constants.isotropic_choi(d);
    let residual = hs_norm(&(&choi.mean - &target));
    let omega = max_entangled_projector(d);
    let omega_element = omega.matmul(&choi.mean).trace().re;
    Ok(ChoiCheck {
        constants,
        residual,
        aggregate_error: choi.aggregate_error(),
        trace: choi.mean.trace().re,
        omega_element,
        choi,
    })
}
