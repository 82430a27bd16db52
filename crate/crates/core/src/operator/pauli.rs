use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{CMatrix, HermitianOperator, QubitSet, C64, MAX_QUBITS};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// (x, z) bits of the symplectic representation `σ ∝ X^x Z^z`.
    pub const fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub const fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// The 2×2 matrix.
    pub fn matrix(self) -> CMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let e = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        CMatrix::from_row_slice(2, 2, &e)
    }
}

/// A tensor product of single-qubit Pauli matrices, one letter per position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    /// A single non-identity letter at `position`.
    pub fn single(n: usize, position: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[position] = p;
        s
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, position: usize) -> Pauli {
        self.letters[position]
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Positions carrying a non-identity letter.
    pub fn support(&self) -> QubitSet {
        QubitSet::new(
            self.letters
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != Pauli::I)
                .map(|(i, _)| i),
        )
        .expect("position labels are distinct")
    }

    /// Symplectic masks; position `i` maps to bit `n - 1 - i`, matching
    /// the big-endian basis index.
    pub fn masks(&self) -> (usize, usize) {
        let n = self.len();
        let mut x = 0usize;
        let mut z = 0usize;
        for (i, p) in self.letters.iter().enumerate() {
            let (xb, zb) = p.xz();
            let bit = 1usize << (n - 1 - i);
            if xb {
                x |= bit;
            }
            if zb {
                z |= bit;
            }
        }
        (x, z)
    }

    pub fn from_masks(n: usize, x: usize, z: usize) -> Self {
        let letters = (0..n)
            .map(|i| {
                let bit = 1usize << (n - 1 - i);
                Pauli::from_xz(x & bit != 0, z & bit != 0)
            })
            .collect();
        Self { letters }
    }

    /// Dense index `(x << n) | z` used by [`PauliCoefficients`].
    pub fn index(&self) -> usize {
        let (x, z) = self.masks();
        (x << self.len()) | z
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        let z = index & ((1usize << n) - 1);
        let x = index >> n;
        Self::from_masks(n, x, z)
    }

    /// All `4^n` strings in dense-index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    /// Non-identity strings with weight at most `k`.
    pub fn up_to_weight(n: usize, k: usize) -> impl Iterator<Item = PauliString> {
        Self::all(n).filter(move |p| (1..=k).contains(&p.weight()))
    }

    /// Dense `2^n × 2^n` matrix on `0..n`.
    pub fn matrix(&self) -> HermitianOperator {
        let n = self.len();
        assert!(n <= MAX_QUBITS, "Pauli string too long for a dense matrix");
        let (x, z) = self.masks();
        let d = 1usize << n;
        let ny = (x & z).count_ones();
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[(k ^ x, k)] = phase(ny, k, z);
        }
        HermitianOperator::from_matrix_unchecked(QubitSet::range(n), m)
    }

    /// `Tr[P A]` computed in `O(2^n)` without building `P`.
    ///
    /// Positions of `self` align with the ordered support of `a`.
    pub fn expectation(&self, a: &HermitianOperator) -> f64 {
        assert_eq!(self.len(), a.num_qubits(), "Pauli length must match the operator support");
        let (x, z) = self.masks();
        let ny = (x & z).count_ones();
        let m = a.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..a.dim() {
            acc += phase(ny, k, z) * m[(k, k ^ x)];
        }
        acc.re
    }
}

/// `⟨k ⊕ x| P |k⟩ = i^{n_Y} (−1)^{|k ∧ z|}`.
fn phase(ny: u32, k: usize, z: usize) -> C64 {
    let sign = if (k & z).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
    i_pow(ny) * sign
}

fn i_pow(e: u32) -> C64 {
    match e % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(PauliString::new)
    }
}

/// In-place Walsh–Hadamard transform (unnormalized).
pub(crate) fn walsh_hadamard(v: &mut [C64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Real Pauli-basis coefficients `⟨P⟩ = Tr[P A]` for all `4^n` strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliCoefficients {
    support: QubitSet,
    values: Vec<f64>,
}

impl PauliCoefficients {
    pub fn zeros(support: QubitSet) -> Self {
        Self { support, values: vec![0.0; 1usize << (2 * support.len())] }
    }

    pub fn num_qubits(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> QubitSet {
        self.support
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.values[p.index()]
    }

    pub fn set(&mut self, p: &PauliString, value: f64) {
        self.values[p.index()] = value;
    }

    /// Values in dense-index order (see [`PauliString::index`]).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, f64)> + '_ {
        let n = self.num_qubits();
        self.values.iter().enumerate().map(move |(i, &v)| (PauliString::from_index(n, i), v))
    }

    /// `(1/2^n) Σ_P ⟨P⟩ P`.
    pub fn to_operator(&self) -> HermitianOperator {
        let n = self.num_qubits();
        let d = 1usize << n;
        let mut m = CMatrix::zeros(d, d);
        let norm = 1.0 / d as f64;
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for x in 0..d {
            for (zz, slot) in buf.iter_mut().enumerate() {
                let ny = (x & zz).count_ones();
                *slot = i_pow(ny) * self.values[(x << n) | zz];
            }
            walsh_hadamard(&mut buf);
            for (k, v) in buf.iter().enumerate() {
                m[(k ^ x, k)] = v * norm;
            }
        }
        HermitianOperator::from_matrix_unchecked(self.support, m)
    }
}

/// All Pauli coefficients of `a` in `O(n 4^n)`.
pub fn pauli_coefficients(a: &HermitianOperator) -> PauliCoefficients {
    let n = a.num_qubits();
    let d = a.dim();
    let m = a.matrix();
    let mut values = vec![0.0; d * d];
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for x in 0..d {
        for (k, slot) in buf.iter_mut().enumerate() {
            *slot = m[(k, k ^ x)];
        }
        walsh_hadamard(&mut buf);
        for (z, w) in buf.iter().enumerate() {
            let ny = (x & z).count_ones();
            values[(x << n) | z] = (i_pow(ny) * w).re;
        }
    }
    PauliCoefficients { support: a.support(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn weight_and_masks_round_trip() {
        let s = p("XIYZ");
        assert_eq!(s.weight(), 3);
        assert_eq!(PauliString::from_index(4, s.index()), s);
        assert_eq!(s.to_string(), "XIYZ");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn dense_matrix_matches_kronecker_of_letters() {
        for s in ["XY", "ZI", "YZ", "IX"] {
            let ps = p(s);
            let kron = ps.letters()[0].matrix().kronecker(&ps.letters()[1].matrix());
            assert_abs_diff_eq!((ps.matrix().matrix() - kron).norm(), 0.0);
        }
    }

    #[test]
    fn involutory_and_traces() {
        for ps in PauliString::all(2) {
            let m = ps.matrix();
            let sq = m.matrix() * m.matrix();
            assert_abs_diff_eq!((sq - CMatrix::identity(4, 4)).norm(), 0.0);
            let expected = if ps.weight() == 0 { 4.0 } else { 0.0 };
            assert_abs_diff_eq!(m.trace(), expected);
        }
    }

    #[test]
    fn xy_spectrum() {
        let ev = p("XY").matrix().eigenvalues();
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn coefficients_of_zero_state() {
        let rho = HermitianOperator::diagonal(QubitSet::singleton(0), &[1.0, 0.0]).unwrap();
        let c = pauli_coefficients(&rho);
        assert_abs_diff_eq!(c.get(&p("I")), 1.0);
        assert_abs_diff_eq!(c.get(&p("Z")), 1.0);
        assert_abs_diff_eq!(c.get(&p("X")), 0.0);
        assert_abs_diff_eq!(c.get(&p("Y")), 0.0);
    }

    #[test]
    fn coefficients_of_maximally_mixed() {
        let n = 3;
        let mm = HermitianOperator::identity(QubitSet::range(n)).scale(1.0 / 8.0);
        let c = pauli_coefficients(&mm);
        for (ps, v) in c.iter() {
            let want = if ps.weight() == 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn expectation_matches_dense_trace() {
        let a = p("XZ").matrix().scale(0.3).try_add(&p("YY").matrix().scale(-0.7)).unwrap();
        for ps in PauliString::all(2) {
            let dense = ps.matrix().trace_product(&a).unwrap();
            assert_abs_diff_eq!(ps.expectation(&a), dense, epsilon = 1e-14);
        }
    }
}
