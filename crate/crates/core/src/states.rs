//! State families used by the experiments and property tests.
//!
//! Random constructors are reproducible from a 64-bit seed: the seed keys a
//! ChaCha20 stream (`rand_chacha::ChaCha20Rng::seed_from_u64`), and the
//! draws are consumed in a fixed order (real part then imaginary part,
//! row-major). That mapping is part of the public contract.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::operator::{CMatrix, DensityMatrix, HermitianOperator, PauliString, QubitSet, C64, MAX_QUBITS};

/// The deterministic RNG used for every seeded constructor.
pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `|x⟩⟨x|` for a bit string, most significant (qubit 0) first.
pub fn basis_state(bits: &[bool]) -> Result<DensityMatrix> {
    let n = bits.len();
    check_n(n)?;
    let d = 1usize << n;
    let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    let mut diag = vec![0.0; d];
    diag[index] = 1.0;
    DensityMatrix::new(HermitianOperator::diagonal(QubitSet::range(n), &diag)?)
}

/// Parses `"0101"`-style bit strings.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse(format!("invalid bit {c:?} in {s:?}"))),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GhzSign {
    Plus,
    Minus,
}

/// Projector onto `(|0…0⟩ ± |1…1⟩)/√2`.
pub fn ghz(n: usize, sign: GhzSign) -> Result<DensityMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ state needs n ≥ 2, got {n}")));
    }
    check_n(n)?;
    let d = 1usize << n;
    let mut psi = vec![C64::new(0.0, 0.0); d];
    psi[0] = C64::new(1.0, 0.0);
    psi[d - 1] = C64::new(if sign == GhzSign::Plus { 1.0 } else { -1.0 }, 0.0);
    DensityMatrix::pure(n, &psi)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(())
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn haar_random_pure_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_n(n)?;
    let psi: Vec<C64> = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
    DensityMatrix::pure(n, &psi)
}

pub fn haar_random_pure(n: usize, seed: u64) -> Result<DensityMatrix> {
    haar_random_pure_with(n, &mut seeded_rng(seed))
}

/// `G G† / Tr[G G†]` for a `2^n × rank` complex Ginibre matrix `G`.
pub fn random_mixed_with<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_n(n)?;
    let d = 1usize << n;
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!("rank must lie in 1..={d}, got {rank}")));
    }
    let mut g = CMatrix::zeros(d, rank);
    for i in 0..d {
        for j in 0..rank {
            g[(i, j)] = complex_gaussian(rng);
        }
    }
    let ggt = &g * g.adjoint();
    DensityMatrix::from_psd_unnormalized(HermitianOperator::from_matrix_unchecked(QubitSet::range(n), ggt))
}

pub fn random_mixed(n: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_mixed_with(n, rank, &mut seeded_rng(seed))
}

/// `ρ_1 ⊗ ρ_2 ⊗ …` with factors laid out left to right.
pub fn product(factors: &[DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("product of zero factors".into()))?;
    rest.iter().try_fold(first.clone(), |acc, f| acc.tensor(f))
}

/// `e^{−H} / Tr e^{−H}` for `H` on `0..n`.
pub fn gibbs(h: &HermitianOperator) -> Result<DensityMatrix> {
    let n = h.num_qubits();
    if h.support() != QubitSet::range(n) {
        return Err(Error::InvalidParameter(format!("Gibbs Hamiltonian must act on 0..{n}")));
    }
    let e = h.eig();
    let min = e.values.first().copied().unwrap_or(0.0);
    // Shift by the ground energy so the largest weight is e^0.
    let unnormalized = HermitianOperator::from_matrix_unchecked(h.support(), e.reassemble(|l| (-(l - min)).exp()));
    DensityMatrix::from_psd_unnormalized(unnormalized)
}

/// `log ω_H = −(H − E₀) − ln Tr e^{−(H − E₀)}`, evaluated from the spectrum
/// of `H` in the log domain. Unlike taking the logarithm of the assembled
/// Gibbs state, this stays accurate when `ω_H` has eigenvalues far below
/// machine precision.
pub fn gibbs_log(h: &HermitianOperator) -> Result<HermitianOperator> {
    let n = h.num_qubits();
    if h.support() != QubitSet::range(n) {
        return Err(Error::InvalidParameter(format!("Gibbs Hamiltonian must act on 0..{n}")));
    }
    let e = h.eig();
    let min = e.values.first().copied().unwrap_or(0.0);
    let log_z: f64 = e.values.iter().map(|l| (-(l - min)).exp()).sum::<f64>().ln();
    Ok(HermitianOperator::from_matrix_unchecked(h.support(), e.reassemble(|l| -(l - min) - log_z)))
}

/// Random Hermitian operator with i.i.d. Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(support: QubitSet, rng: &mut R) -> HermitianOperator {
    let d = 1usize << support.len();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        let re: f64 = rng.sample(StandardNormal);
        m[(i, i)] = C64::new(re, 0.0);
        for j in (i + 1)..d {
            let z = complex_gaussian(rng) * std::f64::consts::FRAC_1_SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::from_matrix_unchecked(support, m)
}

/// Random Hermitian operator on `0..n` with its trace removed.
pub fn random_traceless<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let support = QubitSet::range(n);
    let h = random_hermitian(support, rng);
    let shift = h.trace() / (1usize << n) as f64;
    &h - &HermitianOperator::identity(support).scale(shift)
}

/// A nearest-neighbour chain Hamiltonian `Σ_b H_b`, one term per bond
/// `{i, i+1}`, each a combination of the 15 non-identity two-qubit Pauli
/// strings with i.i.d. uniform `[−1, 1]` coefficients.
#[derive(Clone, Debug)]
pub struct ChainHamiltonian {
    n: usize,
    bonds: Vec<HermitianOperator>,
}

impl ChainHamiltonian {
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("chain needs n ≥ 2, got {n}")));
        }
        check_n(n)?;
        let bonds = (0..n - 1)
            .map(|i| {
                let support = QubitSet::new([i, i + 1]).expect("distinct");
                let mut acc = HermitianOperator::zeros(support);
                for p in PauliString::all(2).filter(|p| p.weight() > 0) {
                    let coeff: f64 = rng.random_range(-1.0..=1.0);
                    let term = p.matrix();
                    let term = HermitianOperator::from_matrix_unchecked(support, term.into_matrix());
                    acc = &acc + &term.scale(coeff);
                }
                acc
            })
            .collect();
        Ok(Self { n, bonds })
    }

    /// Builds from explicit bond operators; bond `i` must act on `{i, i+1}`.
    pub fn from_bonds(n: usize, bonds: Vec<HermitianOperator>) -> Result<Self> {
        if bonds.len() + 1 != n {
            return Err(Error::InvalidParameter(format!("{} bonds for a chain of {n}", bonds.len())));
        }
        for (i, b) in bonds.iter().enumerate() {
            let want = QubitSet::new([i, i + 1])?;
            if b.support() != want {
                return Err(Error::SupportMismatch(b.support(), want));
            }
        }
        Ok(Self { n, bonds })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn bonds(&self) -> &[HermitianOperator] {
        &self.bonds
    }

    /// The full operator on `0..n`.
    pub fn total(&self) -> HermitianOperator {
        let full = QubitSet::range(self.n);
        self.bonds
            .iter()
            .fold(HermitianOperator::zeros(full), |acc, b| &acc + &b.embed(full).expect("bond inside chain"))
    }

    /// Bondwise difference `self − other`.
    pub fn difference(&self, other: &ChainHamiltonian) -> Result<ChainHamiltonian> {
        if self.n != other.n {
            return Err(Error::InvalidParameter("chain lengths differ".into()));
        }
        let bonds = self.bonds.iter().zip(&other.bonds).map(|(a, b)| a - b).collect();
        Ok(Self { n: self.n, bonds })
    }

    pub fn scale(&self, factor: f64) -> ChainHamiltonian {
        Self { n: self.n, bonds: self.bonds.iter().map(|b| b.scale(factor)).collect() }
    }
}

/// Declarative description of a test state.
///
/// Text form (used by the experiment config and the CLI):
///
/// | form | state |
/// |------|-------|
/// | `basis:0110` | computational basis state |
/// | `ghz+:4`, `ghz-:4` | GHZ states |
/// | `haar:<n>:<seed>` | Haar-random pure state |
/// | `mixed:<n>:<rank>:<seed>` | Ginibre random mixed state |
/// | `gibbs:<n>:<seed>` | Gibbs state of a random chain Hamiltonian |
/// | `product:<spec>\|<spec>…` | tensor product of the listed factors |
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Basis(Vec<bool>),
    GhzPlus(usize),
    GhzMinus(usize),
    HaarPure { n: usize, seed: u64 },
    RandomMixed { n: usize, rank: usize, seed: u64 },
    Product(Vec<StateSpec>),
    Gibbs { n: usize, seed: u64 },
}

impl StateSpec {
    pub fn num_qubits(&self) -> usize {
        match self {
            StateSpec::Basis(b) => b.len(),
            StateSpec::GhzPlus(n) | StateSpec::GhzMinus(n) => *n,
            StateSpec::HaarPure { n, .. } | StateSpec::RandomMixed { n, .. } | StateSpec::Gibbs { n, .. } => *n,
            StateSpec::Product(f) => f.iter().map(StateSpec::num_qubits).sum(),
        }
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        match self {
            StateSpec::Basis(bits) => basis_state(bits),
            StateSpec::GhzPlus(n) => ghz(*n, GhzSign::Plus),
            StateSpec::GhzMinus(n) => ghz(*n, GhzSign::Minus),
            StateSpec::HaarPure { n, seed } => haar_random_pure(*n, *seed),
            StateSpec::RandomMixed { n, rank, seed } => random_mixed(*n, *rank, *seed),
            StateSpec::Gibbs { n, seed } => {
                let h = ChainHamiltonian::random(*n, &mut seeded_rng(*seed))?;
                gibbs(&h.total())
            }
            StateSpec::Product(factors) => {
                let built = factors.iter().map(StateSpec::build).collect::<Result<Vec<_>>>()?;
                product(&built)
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Basis(bits) => {
                write!(f, "basis:")?;
                for &b in bits {
                    write!(f, "{}", b as u8)?;
                }
                Ok(())
            }
            StateSpec::GhzPlus(n) => write!(f, "ghz+:{n}"),
            StateSpec::GhzMinus(n) => write!(f, "ghz-:{n}"),
            StateSpec::HaarPure { n, seed } => write!(f, "haar:{n}:{seed}"),
            StateSpec::RandomMixed { n, rank, seed } => write!(f, "mixed:{n}:{rank}:{seed}"),
            StateSpec::Gibbs { n, seed } => write!(f, "gibbs:{n}:{seed}"),
            StateSpec::Product(factors) => {
                write!(f, "product:")?;
                for (i, s) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("invalid {what} {s:?}")))
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("state spec {s:?} has no ':'")))?;
        let fields: Vec<&str> = rest.split(':').collect();
        let arity = |k: usize| -> Result<()> {
            if fields.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("{kind} spec expects {k} fields, got {s:?}")))
            }
        };
        match kind {
            "basis" => Ok(StateSpec::Basis(parse_bits(rest)?)),
            "ghz+" => {
                arity(1)?;
                Ok(StateSpec::GhzPlus(parse_num(fields[0], "n")?))
            }
            "ghz-" => {
                arity(1)?;
                Ok(StateSpec::GhzMinus(parse_num(fields[0], "n")?))
            }
            "haar" => {
                arity(2)?;
                Ok(StateSpec::HaarPure { n: parse_num(fields[0], "n")?, seed: parse_num(fields[1], "seed")? })
            }
            "mixed" => {
                arity(3)?;
                Ok(StateSpec::RandomMixed {
                    n: parse_num(fields[0], "n")?,
                    rank: parse_num(fields[1], "rank")?,
                    seed: parse_num(fields[2], "seed")?,
                })
            }
            "gibbs" => {
                arity(2)?;
                Ok(StateSpec::Gibbs { n: parse_num(fields[0], "n")?, seed: parse_num(fields[1], "seed")? })
            }
            "product" => rest.split('|').map(str::parse).collect::<Result<Vec<_>>>().map(StateSpec::Product),
            _ => Err(Error::Parse(format!("unknown state kind {kind:?}"))),
        }
    }
}
