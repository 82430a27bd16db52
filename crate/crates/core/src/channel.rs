//! Single-qubit quantum channels in Kraus form, applied to one qubit of a
//! larger operator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator, C64};

type Kraus = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct SingleQubitChannel {
    kraus: Vec<Kraus>,
}

impl SingleQubitChannel {
    /// Validates completeness `Σ K† K = I` to `1e-10`.
    pub fn from_kraus(kraus: Vec<Kraus>) -> Result<Self> {
        let mut s = [[ZERO; 2]; 2];
        for k in &kraus {
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += k[0][i].conj() * k[0][j] + k[1][i].conj() * k[1][j];
                }
            }
        }
        let defect = (s[0][0] - ONE).norm() + (s[1][1] - ONE).norm() + s[0][1].norm() + s[1][0].norm();
        if kraus.is_empty() || defect > 1e-10 {
            return Err(Error::InvalidParameter(format!("Kraus operators are not trace preserving (defect {defect:e})")));
        }
        Ok(Self { kraus })
    }

    /// `ρ ↦ (1 − p) ρ + p I/2`, `p ∈ [0, 4/3]`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=4.0 / 3.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing parameter {p} outside [0, 4/3]")));
        }
        let a = C64::new((1.0 - 0.75 * p).sqrt(), 0.0);
        let b = (p / 4.0).sqrt();
        let x = [[ZERO, ONE], [ONE, ZERO]];
        let y = [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]];
        let z = [[ONE, ZERO], [ZERO, -ONE]];
        let scaled = |m: Kraus, s: f64| m.map(|row| row.map(|v| v * s));
        Self::from_kraus(vec![[[a, ZERO], [ZERO, a]], scaled(x, b), scaled(y, b), scaled(z, b)])
    }

    /// Decay `|1⟩ → |0⟩` with probability `γ ∈ [0, 1]`.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("damping {gamma} outside [0, 1]")));
        }
        let k0 = [[ONE, ZERO], [ZERO, C64::new((1.0 - gamma).sqrt(), 0.0)]];
        let k1 = [[ZERO, C64::new(gamma.sqrt(), 0.0)], [ZERO, ZERO]];
        Self::from_kraus(vec![k0, k1])
    }

    pub fn unitary(u: Kraus) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    /// Haar-random unitary conjugation (Gram-Schmidt on a Ginibre matrix).
    pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (a0, a1, b0, b1) = (g(), g(), g(), g());
        let na = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        let (u0, u1) = (a0 / na, a1 / na);
        let proj = u0.conj() * b0 + u1.conj() * b1;
        let (v0, v1) = (b0 - proj * u0, b1 - proj * u1);
        let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (v0, v1) = (v0 / nv, v1 / nv);
        // Columns (u, v).
        Self { kraus: vec![[[u0, v0], [u1, v1]]] }
    }

    pub fn kraus(&self) -> &[Kraus] {
        &self.kraus
    }

    /// `Σ_i K_i A K_i†` with each `K_i` acting on qubit `q` of `a`.
    pub fn apply(&self, a: &HermitianOperator, q: usize) -> Result<HermitianOperator> {
        let support = a.support();
        let pos = support.position(q).ok_or(Error::NotSubset {
            keep: crate::operator::QubitSet::singleton(q),
            support,
        })?;
        let bit = 1usize << (support.len() - 1 - pos);
        let d = a.dim();
        let m = a.matrix();
        let mut out = CMatrix::zeros(d, d);
        for k in &self.kraus {
            for r in 0..d {
                let rb = usize::from(r & bit != 0);
                let r0 = r & !bit;
                for c in 0..d {
                    let cb = usize::from(c & bit != 0);
                    let c0 = c & !bit;
                    let mut acc = ZERO;
                    for i in 0..2 {
                        let ki = k[rb][i];
                        if ki == ZERO {
                            continue;
                        }
                        for j in 0..2 {
                            acc += ki * m[(r0 | (i * bit), c0 | (j * bit))] * k[cb][j].conj();
                        }
                    }
                    out[(r, c)] += acc;
                }
            }
        }
        HermitianOperator::new(support, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{Pauli, PauliString, QubitSet};
    use crate::states::{haar_random_pure, seeded_rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn depolarizing_shrinks_bloch_vector() {
        let rho = haar_random_pure(1, 3).unwrap();
        let ch = SingleQubitChannel::depolarizing(0.4).unwrap();
        let out = ch.apply(rho.op(), 0).unwrap();
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let s = PauliString::new(vec![p]);
            assert_abs_diff_eq!(s.expectation(&out), 0.6 * s.expectation(rho.op()), epsilon = 1e-12);
        }
        assert!(SingleQubitChannel::depolarizing(2.0).is_err());
    }

    #[test]
    fn amplitude_damping_fixes_ground_state() {
        let ch = SingleQubitChannel::amplitude_damping(1.0).unwrap();
        let one = HermitianOperator::diagonal(QubitSet::singleton(0), &[0.0, 1.0]).unwrap();
        let out = ch.apply(&one, 0).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn acts_on_requested_qubit_only() {
        let rho = haar_random_pure(3, 8).unwrap();
        let ch = SingleQubitChannel::depolarizing(1.0).unwrap();
        let out = ch.apply(rho.op(), 1).unwrap();
        assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-12);
        let keep = QubitSet::new([0, 2]).unwrap();
        let before = rho.marginal(keep).unwrap();
        let after = out.partial_trace(keep).unwrap();
        assert!(before.max_abs_diff(&after) < 1e-12);
        let mid = out.partial_trace(QubitSet::singleton(1)).unwrap();
        assert!(mid.max_abs_diff(&HermitianOperator::identity(QubitSet::singleton(1)).scale(0.5)) < 1e-12);
    }

    #[test]
    fn random_unitary_preserves_spectrum() {
        let rho = haar_random_pure(2, 1).unwrap();
        let ch = SingleQubitChannel::random_unitary(&mut seeded_rng(4));
        SingleQubitChannel::from_kraus(ch.kraus().to_vec()).unwrap();
        let out = ch.apply(rho.op(), 0).unwrap();
        for (a, b) in out.eigenvalues().iter().zip(rho.op().eigenvalues()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
}
