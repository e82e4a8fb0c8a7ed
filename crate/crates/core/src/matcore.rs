//! Dense complex matrices: tensor products, partial traces, Hilbert-Schmidt
//! geometry and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Storage is row-major. Every dimension in this crate is small (at most a
//! few dozen), so there are no blocked or sparse paths.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::{Error, Result};

/// Tolerance used for Hermiticity and unitarity preconditions.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm (relative) at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;
/// Sweep limit for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Hybrid tolerance `tol * max(1, scale)`.
#[inline]
pub fn scaled_tol(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

/// A square matrix of complex entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero `dim x dim` matrix. Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_row_major(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(x, 0.0);
        }
        m
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex64]) {
        for (i, &z) in col.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Matrix product. Panics on dimension mismatch; use [`ComplexMatrix::try_matmul`]
    /// when the dimensions come from user input.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        check_same_dim(self, rhs)?;
        Ok(self.matmul(rhs))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Frobenius norm of `self - self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= scaled_tol(tol, hs_norm(self))
    }

    /// Frobenius norm of `self^dagger self - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { ONE } else { ZERO };
                acc += (prod[(i, j)] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= scaled_tol(tol, self.dim as f64)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Symmetrizes to `(A + A^dagger)/2`, removing rounding asymmetry.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two vectors.
pub fn tensor_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

/// Partial trace over the second (environment) factor of `H_S ⊗ H_E`.
pub fn partial_trace_env(x: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<ComplexMatrix> {
    check_split(x, d_s, d_e)?;
    let mut out = ComplexMatrix::zeros(d_s);
    for i in 0..d_s {
        for j in 0..d_s {
            let mut acc = ZERO;
            for k in 0..d_e {
                acc += x[(i * d_e + k, j * d_e + k)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace over the first (system) factor of `H_S ⊗ H_E`.
pub fn partial_trace_sys(x: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<ComplexMatrix> {
    check_split(x, d_s, d_e)?;
    let mut out = ComplexMatrix::zeros(d_e);
    for k in 0..d_e {
        for l in 0..d_e {
            let mut acc = ZERO;
            for i in 0..d_s {
                acc += x[(i * d_e + k, i * d_e + l)];
            }
            out[(k, l)] = acc;
        }
    }
    Ok(out)
}

fn check_split(x: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<()> {
    if d_s == 0 || d_e == 0 || x.dim != d_s * d_e {
        return Err(Error::DimensionMismatch {
            expected: d_s * d_e,
            found: x.dim,
        });
    }
    Ok(())
}

/// Hilbert-Schmidt inner product `Tr(a^dagger b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    check_same_dim(a, b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    hs_norm_sqr(a).sqrt()
}

pub fn hs_norm_sqr(a: &ComplexMatrix) -> f64 {
    a.data.iter().map(|z| z.norm_sqr()).sum()
}

/// `u x u^dagger` for a unitary `u`.
pub fn conj_by_unitary(u: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(u, x)?;
    let residual = u.unitarity_residual();
    if residual > scaled_tol(STRUCTURE_TOL, u.dim as f64) {
        return Err(Error::NotUnitary { residual });
    }
    Ok(conj_unchecked(u, x))
}

/// `u x u^dagger` without the unitarity check. For hot Monte Carlo loops whose
/// unitaries come straight from a sampler.
pub(crate) fn conj_unchecked(u: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    let ux = u.matmul(x);
    let n = u.dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        let ux_row = &ux.data[i * n..(i + 1) * n];
        for j in 0..n {
            let u_row = &u.data[j * n..(j + 1) * n];
            out.data[i * n + j] = ux_row.iter().zip(u_row).map(|(a, b)| a * b.conj()).sum();
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are ascending. Eigenvector `k` is column `k` of `eigenvectors`,
/// with its first non-negligible component made real and positive.
#[derive(Debug, Clone)]
pub struct HermitianEigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigensystem {
    /// `V diag(λ) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                let vik = v[(i, k)] * lambda;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    /// Applies `f` to the spectrum: `V diag(f(λ)) V^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        Self {
            eigenvalues: self.eigenvalues.iter().map(|&x| f(x)).collect(),
            eigenvectors: self.eigenvectors.clone(),
        }
        .reconstruct()
    }

    /// True when two neighbouring eigenvalues are closer than [`DEGENERACY_GAP`].
    pub fn is_degenerate(&self) -> bool {
        self.eigenvalues
            .windows(2)
            .any(|w| w[1] - w[0] < DEGENERACY_GAP)
    }
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigensystem> {
    let scale = hs_norm(a);
    let residual = a.hermiticity_residual();
    if residual > scaled_tol(STRUCTURE_TOL, scale) {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.dim;
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let stop = scaled_tol(JACOBI_TOL, scale);

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&m) <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&m) > stop {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    Ok(order_eigenpairs(eigenvalues, v))
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Zeroes `m[p,q]` with `G = D R D^dagger`, where `D` removes the phase of
/// the pivot and `R` is the real symmetric Jacobi rotation.
fn jacobi_rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // Columns p, q of G.
    let gpp = Complex64::new(c, 0.0);
    let gqp = -phase.conj() * s;
    let gpq = phase * s;
    let gqq = Complex64::new(c, 0.0);

    let n = m.dim;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * gpp + mkq * gqp;
        m[(k, q)] = mkp * gpq + mkq * gqq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = gpp.conj() * mpk + gqp.conj() * mqk;
        m[(q, k)] = gpq.conj() * mpk + gqq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(app - t * r, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * r, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

const FIRST_COMPONENT_TOL: f64 = 1e-10;

fn leading_component(col: &[Complex64]) -> (usize, Complex64) {
    col.iter()
        .copied()
        .enumerate()
        .find(|(_, z)| z.norm() > FIRST_COMPONENT_TOL)
        .unwrap_or((0, col[0]))
}

/// Sorts ascending, orders degenerate clusters by the leading component of
/// each eigenvector (earliest index, then larger modulus, then smaller phase),
/// and rotates each vector so that component is real positive.
fn order_eigenpairs(eigenvalues: Vec<f64>, v: ComplexMatrix) -> HermitianEigensystem {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigenvalues[i].total_cmp(&eigenvalues[j]).then(i.cmp(&j)));

    let columns: Vec<Vec<Complex64>> = (0..n).map(|k| v.column(k)).collect();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[order[end]] - eigenvalues[order[end - 1]] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&i, &j| {
                let (ii, zi) = leading_component(&columns[i]);
                let (ij, zj) = leading_component(&columns[j]);
                ii.cmp(&ij)
                    .then(zj.norm().total_cmp(&zi.norm()))
                    .then(zi.arg().total_cmp(&zj.arg()))
            });
        }
        start = end;
    }

    let mut vectors = ComplexMatrix::zeros(n);
    let mut values = Vec::with_capacity(n);
    for (k, &src) in order.iter().enumerate() {
        let col = &columns[src];
        let (_, lead) = leading_component(col);
        let fix = if lead.norm() > 0.0 {
            lead.conj() / lead.norm()
        } else {
            ONE
        };
        let fixed: Vec<Complex64> = col.iter().map(|&z| z * fix).collect();
        vectors.set_column(k, &fixed);
        values.push(eigenvalues[src]);
    }
    HermitianEigensystem {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let data = (0..n * n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_row_major(n, data).unwrap()
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        random_matrix(n, rng).hermitian_part()
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn tensor_of_identities() {
        let out = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(out, ComplexMatrix::identity(6));
    }

    #[test]
    fn tensor_of_diagonals() {
        let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_diag(&[3.0, 4.0]);
        assert_eq!(
            tensor(&a, &b),
            ComplexMatrix::from_real_diag(&[3.0, 4.0, 6.0, 8.0])
        );
    }

    #[test]
    fn tensor_trace_is_product_of_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        let t = tensor(&a, &b);
        // brute force over the index definition
        let mut brute = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for k in 0..3 {
                brute += a[(i, i)] * b[(k, k)];
            }
        }
        assert!((t.trace() - brute).norm() < 1e-14);
        assert!((t.trace() - a.trace() * b.trace()).norm() < 1e-13);
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let cm = random_matrix(2, &mut rng);
        let left = tensor(&tensor(&a, &b), &cm);
        let right = tensor(&a, &tensor(&b, &cm));
        assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(2, &mut rng);
        let b = random_matrix(3, &mut rng);
        let out = partial_trace_env(&tensor(&a, &b), 2, 3).unwrap();
        assert!(out.max_abs_diff(&a.scale(b.trace())) < 1e-14);
        let env = partial_trace_sys(&tensor(&a, &b), 2, 3).unwrap();
        assert!(env.max_abs_diff(&b.scale(a.trace())) < 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let rho = ComplexMatrix::outer(&psi, &psi).unwrap();
        let out = partial_trace_env(&rho, 2, 2).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_hermitian(6, &mut rng);
        let out = partial_trace_env(&x, 2, 3).unwrap();
        assert!((out.trace() - x.trace()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_split() {
        let x = ComplexMatrix::identity(6);
        assert!(matches!(
            partial_trace_env(&x, 2, 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_norm_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = random_matrix(6, &mut rng);
            let reduced = partial_trace_env(&x, 2, 3).unwrap();
            assert!(hs_norm_sqr(&reduced) <= 3.0 * hs_norm_sqr(&x) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn hs_norm_values() {
        assert!((hs_norm(&ComplexMatrix::identity(5)) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(hs_norm(&ComplexMatrix::zeros(3)), 0.0);
        assert!((hs_norm(&pauli_x()) - 2f64.sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_matrix(4, &mut rng);
        let inner = hs_inner(&a, &a).unwrap();
        assert!((inner.re.sqrt() - hs_norm(&a)).abs() < 1e-14);
        assert!(inner.im.abs() < 1e-14);
    }

    #[test]
    fn hs_inner_rejects_mismatch() {
        assert!(hs_inner(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn hs_norm_triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_matrix(4, &mut rng);
            let b = random_matrix(4, &mut rng);
            assert!(hs_norm(&(&a + &b)) <= hs_norm(&a) + hs_norm(&b) + 1e-14);
        }
    }

    #[test]
    fn eig_of_diagonal_matrix() {
        let es = eig_hermitian(&ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(es.eigenvalues, vec![1.0, 2.0, 3.0]);
        let expected =
            ComplexMatrix::from_real(3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(es.eigenvectors, expected);
    }

    #[test]
    fn eig_of_two_by_two() {
        let a = ComplexMatrix::from_real(2, &[0.75, 0.25, 0.25, 0.25]).unwrap();
        let es = eig_hermitian(&a).unwrap();
        let root = 0.5f64.sqrt();
        assert!((es.eigenvalues[0] - (1.0 - root) / 2.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - (1.0 + root) / 2.0).abs() < 1e-14);
        assert!((es.eigenvalues[0] - 0.146447).abs() < 1e-6);
        assert!((es.eigenvalues[1] - 0.853553).abs() < 1e-6);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let a = random_hermitian(6, &mut rng);
            let es = eig_hermitian(&a).unwrap();
            assert!(hs_norm(&(&es.reconstruct() - &a)) < 1e-10);
            assert!(es.eigenvectors.unitarity_residual() < 1e-10);
            assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_handles_degenerate_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = eig_hermitian(&random_hermitian(5, &mut rng))
            .unwrap()
            .eigenvectors;
        let d = ComplexMatrix::from_real_diag(&[1.0, 1.0, 2.0, 2.0, 2.0]);
        let a = conj_by_unitary(&q, &d).unwrap().hermitian_part();
        let es = eig_hermitian(&a).unwrap();
        assert!(hs_norm(&(&es.reconstruct() - &a)) < 1e-10);
        assert!(es.eigenvectors.unitarity_residual() < 1e-10);
        assert!(es.is_degenerate());
        // leading components real positive
        for k in 0..5 {
            let (_, lead) = leading_component(&es.eigenvectors.column(k));
            assert!(lead.re > 0.0 && lead.im.abs() < 1e-15);
        }
    }

    #[test]
    fn eig_is_deterministic_for_maximally_mixed() {
        let es = eig_hermitian(&ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        assert_eq!(es.eigenvectors, ComplexMatrix::identity(2));
        assert!(es.is_degenerate());
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn conj_by_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = random_matrix(4, &mut rng);
        let out = conj_by_unitary(&ComplexMatrix::identity(4), &x).unwrap();
        assert!(out.max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn conj_preserves_norm_trace_and_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u = eig_hermitian(&random_hermitian(4, &mut rng))
                .unwrap()
                .eigenvectors;
            let x = random_hermitian(4, &mut rng);
            let y = conj_by_unitary(&u, &x).unwrap();
            assert!((hs_norm(&y) - hs_norm(&x)).abs() < 1e-13);
            assert!((y.trace() - x.trace()).norm() < 1e-13);
            assert!(y.is_hermitian(1e-12));
            let ex = eig_hermitian(&x).unwrap().eigenvalues;
            let ey = eig_hermitian(&y.hermitian_part()).unwrap().eigenvalues;
            for (a, b) in ex.iter().zip(&ey) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn conj_rejects_non_unitary() {
        let u = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        assert!(matches!(
            conj_by_unitary(&u, &ComplexMatrix::identity(2)),
            Err(Error::NotUnitary { .. })
        ));
    }
}
