use crate::error::{Error, Result};

use super::{CMatrix, HermitianOperator, PauliString, QubitSet, C64};

const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const KERNEL_TOL: f64 = 1e-9;

/// A positive semidefinite, unit-trace operator on the register `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let n = op.num_qubits();
        if op.support() != QubitSet::range(n) {
            return Err(Error::InvalidState(format!("support {} is not 0..{n}", op.support())));
        }
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = op.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e} is negative")));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(n: usize, matrix: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::on_register(n, matrix)?)
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(n: usize, psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { op: HermitianOperator::projector(QubitSet::range(n), &psi)? })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = (1usize << n) as f64;
        Self { op: HermitianOperator::identity(QubitSet::range(n)).scale(1.0 / d) }
    }

    /// Normalizes a positive semidefinite operator by its trace.
    pub(crate) fn from_psd_unnormalized(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        Self::new(op.scale(1.0 / tr))
    }

    pub fn num_qubits(&self) -> usize {
        self.op.num_qubits()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op).expect("same support")
    }

    /// `Tr[P ρ]`.
    pub fn expectation(&self, p: &PauliString) -> f64 {
        p.expectation(&self.op)
    }

    /// Reduced state on `keep`, supported on those labels.
    pub fn marginal(&self, keep: QubitSet) -> Result<HermitianOperator> {
        self.op.partial_trace(keep)
    }

    /// `ρ ⊗ σ` with `σ` relabelled onto `n .. n + m`.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let n = self.num_qubits();
        let shifted = shift_labels(other.op(), n);
        Ok(Self { op: self.op.tensor(&shifted)? })
    }

    /// `ρ - σ`.
    pub fn difference(&self, other: &DensityMatrix) -> Result<HermitianOperator> {
        self.op.try_sub(&other.op)
    }
}

/// Same matrix, support labels moved up by `offset`.
pub fn shift_labels(op: &HermitianOperator, offset: usize) -> HermitianOperator {
    let support = QubitSet::from_mask(op.support().mask() << offset);
    HermitianOperator::from_matrix_unchecked(support, op.matrix().clone())
}

/// Quantum relative entropy `S(ρ‖σ) = Tr[ρ (log ρ − log σ)]` in nats.
///
/// Fails when `ρ` has weight on the kernel of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != sigma.num_qubits() {
        return Err(Error::SupportMismatch(rho.op.support(), sigma.op.support()));
    }
    let es = sigma.op.eig();
    let d = es.values.len();
    let m = rho.matrix();
    let mut cross = 0.0;
    for (j, &lam) in es.values.iter().enumerate() {
        let v = es.vectors.column(j);
        // ⟨v|ρ|v⟩
        let mut w = C64::new(0.0, 0.0);
        for a in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for b in 0..d {
                row += m[(a, b)] * v[b];
            }
            w += v[a].conj() * row;
        }
        let weight = w.re;
        if lam <= KERNEL_TOL {
            if weight > KERNEL_TOL {
                return Err(Error::SupportViolation(weight));
            }
            continue;
        }
        cross += weight * lam.ln();
    }
    let neg_entropy: f64 = rho
        .op
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > 0.0)
        .map(|l| l * l.ln())
        .sum();
    Ok(neg_entropy - cross)
}
