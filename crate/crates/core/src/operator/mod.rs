//! Dense Hermitian operators on small qubit registers.
//!
//! Every operator carries its [`QubitSet`] support. Index arithmetic is
//! big-endian throughout: the smallest label in the support is the most
//! significant bit of the computational-basis index, so `tensor` and
//! `partial_trace` always agree on where a qubit lives.

mod pauli;
mod qubits;
mod state;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use pauli::{pauli_coefficients, Pauli, PauliCoefficients, PauliString};
pub use qubits::QubitSet;
pub(crate) use qubits::{positions_in, scatter_table};
pub use state::{relative_entropy, shift_labels, DensityMatrix};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Largest register a single dense operator may act on.
pub const MAX_QUBITS: usize = 12;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A self-adjoint operator acting on the qubits of `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    support: QubitSet,
    matrix: CMatrix,
}

/// Spectral decomposition `A = V diag(values) V†`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    /// `V f(Λ) V†`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..d {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_dims(support: QubitSet, matrix: &CMatrix) -> Result<()> {
    let m = support.len();
    if m > MAX_QUBITS {
        return Err(Error::TooManyQubits(m));
    }
    let d = 1usize << m;
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::DimensionMismatch {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
            qubits: m,
        });
    }
    Ok(())
}

/// Relative deviation `max|A - A†| / max|A|` (zero for the zero matrix).
pub fn hermiticity_defect(matrix: &CMatrix) -> f64 {
    let scale = max_abs(matrix);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..matrix.nrows() {
        for j in i..matrix.ncols() {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

fn symmetrize(matrix: &mut CMatrix) {
    let d = matrix.nrows();
    for i in 0..d {
        matrix[(i, i)] = C64::new(matrix[(i, i)].re, 0.0);
        for j in (i + 1)..d {
            let avg = (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5;
            matrix[(i, j)] = avg;
            matrix[(j, i)] = avg.conj();
        }
    }
}

/// Eigendecomposition of a raw matrix, rejecting non-Hermitian input.
pub fn eig_matrix(matrix: &CMatrix) -> Result<Eigen> {
    let defect = hermiticity_defect(matrix);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let mut m = matrix.clone();
    symmetrize(&mut m);
    Ok(eig_symmetrized(m))
}

fn eig_symmetrized(m: CMatrix) -> Eigen {
    let d = m.nrows();
    if d == 1 {
        return Eigen {
            values: vec![m[(0, 0)].re],
            vectors: CMatrix::identity(1, 1),
        };
    }
    let se = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| se.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

impl HermitianOperator {
    /// Validates dimensions and Hermiticity, then stores `(A + A†)/2`.
    pub fn new(support: QubitSet, matrix: CMatrix) -> Result<Self> {
        check_dims(support, &matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::from_matrix_unchecked(support, matrix))
    }

    /// For matrices that are Hermitian by construction up to rounding.
    pub(crate) fn from_matrix_unchecked(support: QubitSet, mut matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), 1usize << support.len());
        symmetrize(&mut matrix);
        Self { support, matrix }
    }

    /// Operator on `0..n` from a real-entry or complex matrix.
    pub fn on_register(n: usize, matrix: CMatrix) -> Result<Self> {
        Self::new(QubitSet::range(n), matrix)
    }

    pub fn zeros(support: QubitSet) -> Self {
        let d = 1usize << support.len();
        Self { support, matrix: CMatrix::zeros(d, d) }
    }

    pub fn identity(support: QubitSet) -> Self {
        let d = 1usize << support.len();
        Self { support, matrix: CMatrix::identity(d, d) }
    }

    /// Real diagonal operator.
    pub fn diagonal(support: QubitSet, diag: &[f64]) -> Result<Self> {
        let d = 1usize << support.len();
        if diag.len() != d {
            return Err(Error::DimensionMismatch { rows: diag.len(), cols: 1, qubits: support.len() });
        }
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        Ok(Self { support, matrix: m })
    }

    /// `|ψ⟩⟨ψ|` (no normalization applied).
    pub fn projector(support: QubitSet, psi: &[C64]) -> Result<Self> {
        let d = 1usize << support.len();
        if psi.len() != d {
            return Err(Error::DimensionMismatch { rows: psi.len(), cols: 1, qubits: support.len() });
        }
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj());
        Ok(Self::from_matrix_unchecked(support, m))
    }

    pub fn support(&self) -> QubitSet {
        self.support
    }

    pub fn num_qubits(&self) -> usize {
        self.support.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `Tr[A B]`, real for Hermitian `A`, `B` on the same support.
    pub fn trace_product(&self, other: &HermitianOperator) -> Result<f64> {
        self.same_support(other)?;
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.matrix[(i, j)] * other.matrix[(j, i)]).re;
            }
        }
        Ok(acc)
    }

    /// Largest entrywise modulus of `A - B`.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        assert_eq!(self.support, other.support, "supports differ");
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// Largest entry modulus, the scale used by the Hermiticity tolerance.
    pub fn max_abs_entry(&self) -> f64 {
        max_abs(&self.matrix)
    }

    fn same_support(&self, other: &HermitianOperator) -> Result<()> {
        if self.support != other.support {
            return Err(Error::SupportMismatch(self.support, other.support));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &HermitianOperator) -> Result<Self> {
        self.same_support(other)?;
        Ok(Self { support: self.support, matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &HermitianOperator) -> Result<Self> {
        self.same_support(other)?;
        Ok(Self { support: self.support, matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { support: self.support, matrix: &self.matrix * C64::new(factor, 0.0) }
    }

    /// Kronecker product over the union of two disjoint supports.
    pub fn tensor(&self, other: &HermitianOperator) -> Result<Self> {
        if !self.support.is_disjoint(other.support) {
            return Err(Error::OverlappingSupports(self.support, other.support));
        }
        let support = self.support.union(other.support);
        if support.len() > MAX_QUBITS {
            return Err(Error::TooManyQubits(support.len()));
        }
        let d = 1usize << support.len();
        let ga = gather_table(support, self.support);
        let gb = gather_table(support, other.support);
        let (a, b) = (&self.matrix, &other.matrix);
        let m = CMatrix::from_fn(d, d, |r, c| a[(ga[r], ga[c])] * b[(gb[r], gb[c])]);
        Ok(Self { support, matrix: m })
    }

    /// Extends `self` by the identity on `full \ support`.
    pub fn embed(&self, full: QubitSet) -> Result<Self> {
        if !self.support.is_subset(full) {
            return Err(Error::NotSubset { keep: self.support, support: full });
        }
        let rest = full.difference(self.support);
        if rest.is_empty() {
            return Ok(self.clone());
        }
        self.tensor(&HermitianOperator::identity(rest))
    }

    /// `Tr_{support \ keep} A`.
    pub fn partial_trace(&self, keep: QubitSet) -> Result<Self> {
        if !keep.is_subset(self.support) {
            return Err(Error::NotSubset { keep, support: self.support });
        }
        if keep == self.support {
            return Ok(self.clone());
        }
        let traced = self.support.difference(keep);
        let kept_idx = scatter_table(&positions_in(self.support, keep));
        let traced_idx = scatter_table(&positions_in(self.support, traced));
        let dk = kept_idx.len();
        let a = &self.matrix;
        let mut m = CMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let (ri, cj) = (kept_idx[i], kept_idx[j]);
                let mut acc = C64::new(0.0, 0.0);
                for &e in &traced_idx {
                    acc += a[(ri | e, cj | e)];
                }
                m[(i, j)] = acc;
            }
        }
        Ok(Self { support: keep, matrix: m })
    }

    pub fn eig(&self) -> Eigen {
        eig_symmetrized(self.matrix.clone())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        if d == 1 {
            return vec![self.matrix[(0, 0)].re];
        }
        let mut v: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Schatten-1 norm `Σ|λ|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    /// Spectral norm `max|λ|`.
    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Applies a real function through the eigenbasis.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eig();
        Self::from_matrix_unchecked(self.support, e.reassemble(f))
    }

    pub fn matrix_exp(&self) -> Self {
        self.map_spectrum(f64::exp)
    }

    pub fn matrix_log(&self) -> Result<Self> {
        let e = self.eig();
        let min = e.values.first().copied().unwrap_or(0.0);
        if min <= 0.0 {
            return Err(Error::NonPositiveSpectrum(min));
        }
        Ok(Self::from_matrix_unchecked(self.support, e.reassemble(f64::ln)))
    }

    /// `A B + B A` over two; Hermitian for Hermitian factors.
    pub fn anticommutator_half(&self, other: &HermitianOperator) -> Result<Self> {
        self.same_support(other)?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        Ok(Self::from_matrix_unchecked(self.support, (ab + ba) * C64::new(0.5, 0.0)))
    }

    /// `U A U†` for a unitary (or any square matrix) of matching dimension.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_matrix_unchecked(self.support, u * &self.matrix * u.adjoint())
    }
}

/// Entry `r` is the index into `sub`'s register of the basis state `r` of
/// `support`'s register.
fn gather_table(support: QubitSet, sub: QubitSet) -> Vec<usize> {
    let positions = positions_in(support, sub);
    let k = positions.len();
    (0..1usize << support.len())
        .map(|r| {
            positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &p)| acc | (((r >> p) & 1) << (k - 1 - j)))
        })
        .collect()
}

/// Free-function forms mirroring the methods.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    a.tensor(b)
}

pub fn partial_trace(a: &HermitianOperator, keep: QubitSet) -> Result<HermitianOperator> {
    a.partial_trace(keep)
}

pub fn trace_norm(a: &HermitianOperator) -> f64 {
    a.trace_norm()
}

pub fn operator_norm(a: &HermitianOperator) -> f64 {
    a.operator_norm()
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    /// Panics if the supports differ; see [`HermitianOperator::try_add`].
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        self.try_add(rhs).expect("operator supports differ")
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    /// Panics if the supports differ; see [`HermitianOperator::try_sub`].
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        self.try_sub(rhs).expect("operator supports differ")
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}
