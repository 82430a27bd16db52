//! Two-copy Bell-basis estimation of Pauli expectation values.
//!
//! Each round takes two copies of `ρ`, pairs qubit `k` of the first copy
//! with qubit `k` of the second, and measures every pair in the Bell basis
//!
//! ```text
//! Ψ± = (|00⟩ ± |11⟩)/√2,    Φ± = (|01⟩ ± |10⟩)/√2.
//! ```
//!
//! Every Bell vector is an eigenvector of `σ ⊗ σ` with eigenvalue `±1`, so
//! a single round yields an unbiased `±1` estimate of
//! `Tr[(P⊗P)(ρ⊗ρ)] = Tr(Pρ)²` for every Pauli string `P` at once. Magnitudes
//! come from the average of these products; signs from a separate majority
//! vote.
//!
//! The joint outcome distribution is computed exactly from the Pauli
//! spectrum of `ρ`:
//! `Pr[S] = 4^{−n} Σ_P ∏_k s(P_k, S_k) Tr(Pρ)²`, evaluated with one `4 × 4`
//! character transform per pair.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::operator::{pauli_coefficients, DensityMatrix, HermitianOperator, Pauli, PauliCoefficients, PauliString, QubitSet};
use crate::shadows::{ceil_count, pauli_count_up_to_weight};

/// Registers above this size are rejected by the exact two-copy sampler.
pub const BELL_MAX_QUBITS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PsiPlus, BellLabel::PsiMinus, BellLabel::PhiPlus, BellLabel::PhiMinus];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> BellLabel {
        Self::ALL[i]
    }

    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn vector(self) -> [f64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BellLabel::PsiPlus => [h, 0.0, 0.0, h],
            BellLabel::PsiMinus => [h, 0.0, 0.0, -h],
            BellLabel::PhiPlus => [0.0, h, h, 0.0],
            BellLabel::PhiMinus => [0.0, h, -h, 0.0],
        }
    }

    /// ASCII token: `P` for Ψ, `F` for Φ.
    pub fn token(self) -> &'static str {
        match self {
            BellLabel::PsiPlus => "P+",
            BellLabel::PsiMinus => "P-",
            BellLabel::PhiPlus => "F+",
            BellLabel::PhiMinus => "F-",
        }
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P+" => Ok(BellLabel::PsiPlus),
            "P-" | "P−" => Ok(BellLabel::PsiMinus),
            "F+" => Ok(BellLabel::PhiPlus),
            "F-" | "F−" => Ok(BellLabel::PhiMinus),
            _ => Err(Error::Parse(format!("bad Bell token {s:?}"))),
        }
    }
}

/// Eigenvalues of `σ ⊗ σ` on the Bell vectors.
pub struct SignTable;

impl SignTable {
    /// Rows `I, X, Y, Z`; columns `Ψ+, Ψ−, Φ+, Φ−`.
    pub const ROWS: [[i8; 4]; 4] = [[1, 1, 1, 1], [1, -1, 1, -1], [-1, 1, 1, -1], [1, 1, -1, -1]];

    pub fn sign(p: Pauli, label: BellLabel) -> i8 {
        Self::ROWS[pauli_digit(p)][label.index()]
    }
}

fn pauli_digit(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// One round of Bell measurements: a label per qubit pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BellOutcomeRecord {
    labels: Vec<BellLabel>,
}

impl BellOutcomeRecord {
    pub fn new(labels: Vec<BellLabel>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &[BellLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `∏_k s(P_k, S_k)`.
    pub fn product_sign(&self, p: &PauliString) -> i8 {
        assert_eq!(p.len(), self.len(), "Pauli string and record lengths differ");
        self.labels.iter().zip(p.letters()).map(|(&l, &q)| SignTable::sign(q, l)).product()
    }

    /// Base-4 index with pair 0 as the most significant digit.
    fn code(&self) -> usize {
        self.labels.iter().fold(0, |acc, l| acc * 4 + l.index())
    }

    fn from_code(n: usize, mut code: usize) -> Self {
        let mut labels = vec![BellLabel::PsiPlus; n];
        for slot in labels.iter_mut().rev() {
            *slot = BellLabel::from_index(code % 4);
            code /= 4;
        }
        Self { labels }
    }
}

impl fmt::Display for BellOutcomeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(l.token())?;
        }
        Ok(())
    }
}

impl FromStr for BellOutcomeRecord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s.split_whitespace().map(str::parse).collect::<Result<Vec<_>>>()?;
        if labels.is_empty() {
            return Err(Error::Parse("empty Bell record".into()));
        }
        Ok(Self { labels })
    }
}

/// Applies `mat` along every base-4 digit of `v` (length `4^n`).
fn site_transform(v: &mut [f64], n: usize, mat: &[[f64; 4]; 4]) {
    let mut stride = 1;
    for _ in 0..n {
        let block = stride * 4;
        for base in (0..v.len()).step_by(block) {
            for off in 0..stride {
                let idx = |a: usize| base + a * stride + off;
                let input = [v[idx(0)], v[idx(1)], v[idx(2)], v[idx(3)]];
                for (a, row) in mat.iter().enumerate() {
                    v[idx(a)] = row.iter().zip(input).map(|(m, x)| m * x).sum();
                }
            }
        }
        stride = block;
    }
}

/// Dense Pauli index for every base-4 digit code (pair/letter 0 most significant).
fn digit_to_dense(n: usize) -> Vec<usize> {
    (0..1usize << (2 * n))
        .map(|mut code| {
            let mut letters = vec![Pauli::I; n];
            for slot in letters.iter_mut().rev() {
                *slot = Pauli::ALL[code % 4];
                code /= 4;
            }
            PauliString::new(letters).index()
        })
        .collect()
}

/// `Pr[S]` for every record `S`, indexed by base-4 code.
pub fn exact_bell_distribution(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let n = rho.num_qubits();
    if n > BELL_MAX_QUBITS {
        return Err(Error::CapExceeded { what: "two-copy Bell sampling", n, cap: BELL_MAX_QUBITS });
    }
    let coeffs = pauli_coefficients(rho.op());
    let mut v: Vec<f64> = digit_to_dense(n).into_iter().map(|i| coeffs.values()[i].powi(2)).collect();
    let mut mat = [[0.0; 4]; 4];
    for (label, row) in mat.iter_mut().enumerate() {
        for (sigma, slot) in row.iter_mut().enumerate() {
            *slot = SignTable::ROWS[sigma][label] as f64 / 4.0;
        }
    }
    site_transform(&mut v, n, &mat);
    v.iter_mut().for_each(|p| *p = p.max(0.0));
    Ok(v)
}

/// Probability of a specific record.
pub fn bell_record_probability(rho: &DensityMatrix, record: &BellOutcomeRecord) -> Result<f64> {
    Ok(exact_bell_distribution(rho)?[record.code()])
}

/// Draws records from the exact two-copy distribution by inverse CDF in
/// lexicographic record order, which is the same as drawing pair 0 from its
/// marginal, then pair 1 from its conditional, and so on.
#[derive(Clone, Debug)]
pub struct BellSampler {
    n: usize,
    cdf: Vec<f64>,
}

impl BellSampler {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let probs = exact_bell_distribution(rho)?;
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self { n: rho.num_qubits(), cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BellOutcomeRecord {
        let u: f64 = rng.random();
        let code = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        BellOutcomeRecord::from_code(self.n, code)
    }

    pub fn sample_many<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<BellOutcomeRecord> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}

/// One record from `ρ ⊗ ρ`. Use [`BellSampler`] for repeated draws.
pub fn sample_bell_outcomes<R: Rng + ?Sized>(rho: &DensityMatrix, rng: &mut R) -> Result<BellOutcomeRecord> {
    Ok(BellSampler::new(rho)?.sample(rng))
}

/// `â(P) = (1/N₁) Σ_t ∏_k s(P_k, S_k^{(t)})`.
pub fn magnitude_sq_estimate(records: &[BellOutcomeRecord], p: &PauliString) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no Bell records supplied".into()));
    }
    let sum: i64 = records.iter().map(|r| r.product_sign(p) as i64).sum();
    Ok(sum as f64 / records.len() as f64)
}

/// `â(P)` for every Pauli string, in dense-index order, from one histogram
/// pass and a character transform.
pub fn magnitude_sq_estimates(records: &[BellOutcomeRecord]) -> Result<PauliCoefficients> {
    let Some(first) = records.first() else {
        return Err(Error::InvalidParameter("no Bell records supplied".into()));
    };
    let n = first.len();
    if records.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("Bell records of different lengths".into()));
    }
    let mut hist = vec![0.0; 1usize << (2 * n)];
    for r in records {
        hist[r.code()] += 1.0;
    }
    let inv = 1.0 / records.len() as f64;
    hist.iter_mut().for_each(|h| *h *= inv);
    let mut mat = [[0.0; 4]; 4];
    for (sigma, row) in mat.iter_mut().enumerate() {
        for (label, slot) in row.iter_mut().enumerate() {
            *slot = SignTable::ROWS[sigma][label] as f64;
        }
    }
    site_transform(&mut hist, n, &mat);
    let mut out = PauliCoefficients::zeros(QubitSet::range(n));
    for (code, dense) in digit_to_dense(n).into_iter().enumerate() {
        out.values_mut()[dense] = hist[code];
    }
    Ok(out)
}

/// `√max(â, 0)`.
pub fn magnitude_estimate(a_hat: f64) -> f64 {
    a_hat.max(0.0).sqrt()
}

/// Majority vote of `votes` i.i.d. `±1` draws with mean `mean`. An even
/// `votes` is raised to the next odd number; the count used is returned.
pub fn majority_sign<R: Rng + ?Sized>(mean: f64, votes: u64, rng: &mut R) -> (i8, u64) {
    let votes = odd_votes(votes);
    let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
    let plus = Binomial::new(votes, p_plus).expect("probability in [0, 1]").sample(rng);
    (if 2 * plus > votes { 1 } else { -1 }, votes)
}

fn odd_votes(votes: u64) -> u64 {
    if votes.is_multiple_of(2) {
        votes + 1
    } else {
        votes
    }
}

/// Sign of `Tr(Pρ)` by majority vote over `n2` simulated single-copy
/// measurements of `P`.
pub fn sign_estimate<R: Rng + ?Sized>(rho: &DensityMatrix, p: &PauliString, n2: u64, rng: &mut R) -> (i8, u64) {
    majority_sign(rho.expectation(p), n2, rng)
}

/// Constants in front of the copy counts; not fixed by theory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellCalibration {
    pub c1: f64,
    pub c2: f64,
}

impl Default for BellCalibration {
    fn default() -> Self {
        Self { c1: 8.0, c2: 8.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BellCopies {
    /// Two-copy rounds for the magnitudes.
    pub n1: u64,
    /// Single copies for the sign votes, before odd adjustment.
    pub n2: u64,
}

impl BellCopies {
    /// Votes actually cast per sign (odd).
    pub fn votes(&self) -> u64 {
        odd_votes(self.n2)
    }

    /// Copies of `ρ` consumed: `2 N₁ + N₂` with the odd-adjusted `N₂`.
    pub fn total(&self) -> u64 {
        2 * self.n1 + self.votes()
    }
}

/// `N₁ = ⌈C₁ ln(2M/δ)/ε⁴⌉`, `N₂ = ⌈C₂ ln(2M/δ)/ε²⌉`.
pub fn required_copies_bell(m: usize, delta: f64, epsilon: f64, cal: BellCalibration) -> Result<BellCopies> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1], got {epsilon}")));
    }
    if !(cal.c1 > 0.0 && cal.c2 > 0.0) {
        return Err(Error::InvalidParameter("calibration constants must be positive".into()));
    }
    let log = (2.0 * m as f64 / delta).ln();
    Ok(BellCopies { n1: ceil_count(cal.c1 * log / epsilon.powi(4)), n2: ceil_count(cal.c2 * log / epsilon.powi(2)) })
}

/// Everything the estimator needs besides the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellPlan {
    pub k_cut: usize,
    pub epsilon: f64,
    pub copies: BellCopies,
}

impl BellPlan {
    /// Copy counts from the accuracy target, with `M` the number of Pauli
    /// strings of weight `1..=k_cut`.
    pub fn from_accuracy(n: usize, k_cut: usize, epsilon: f64, delta: f64, cal: BellCalibration) -> Result<Self> {
        if k_cut > n {
            return Err(Error::InvalidParameter(format!("k_cut {k_cut} exceeds n = {n}")));
        }
        let copies = if k_cut == 0 {
            BellCopies { n1: 0, n2: 0 }
        } else {
            required_copies_bell(pauli_count_up_to_weight(n, k_cut), delta, epsilon, cal)?
        };
        Ok(Self { k_cut, epsilon, copies })
    }
}

#[derive(Clone, Debug)]
pub struct BellEstimate {
    pub plan: BellPlan,
    /// `P̂` for every Pauli string, `⟨I⟩ = 1`.
    pub coefficients: PauliCoefficients,
    /// `(1/2^n) Σ_P P̂ P`; Hermitian with unit trace, not necessarily positive.
    pub operator: HermitianOperator,
}

/// Runs the protocol with copy counts from [`BellPlan::from_accuracy`] and
/// the default calibration.
pub fn bell_state_estimate<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    k_cut: usize,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<BellEstimate> {
    let plan = BellPlan::from_accuracy(rho.num_qubits(), k_cut, epsilon, delta, BellCalibration::default())?;
    bell_state_estimate_with(rho, &plan, rng)
}

/// Magnitudes from `N₁` Bell rounds; signs by majority vote for every
/// Pauli whose magnitude exceeds `ε`; all other coefficients zero.
pub fn bell_state_estimate_with<R: Rng + ?Sized>(rho: &DensityMatrix, plan: &BellPlan, rng: &mut R) -> Result<BellEstimate> {
    BellSource::new(rho)?.estimate(plan, rng)
}

/// A state prepared for repeated runs of the protocol: the two-copy
/// sampler and the exact expectations that drive the sign votes.
///
/// Sign votes are drawn independently for each Pauli string, while the
/// copy count charges `N₂` once for all of them.
#[derive(Clone, Debug)]
pub struct BellSource {
    n: usize,
    sampler: BellSampler,
    truth: PauliCoefficients,
}

impl BellSource {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self { n: rho.num_qubits(), sampler: BellSampler::new(rho)?, truth: pauli_coefficients(rho.op()) })
    }

    pub fn sampler(&self) -> &BellSampler {
        &self.sampler
    }

    pub fn estimate<R: Rng + ?Sized>(&self, plan: &BellPlan, rng: &mut R) -> Result<BellEstimate> {
        let n = self.n;
        if plan.k_cut > n {
            return Err(Error::InvalidParameter(format!("k_cut {} exceeds n = {n}", plan.k_cut)));
        }
        let mut coefficients = PauliCoefficients::zeros(QubitSet::range(n));
        coefficients.values_mut()[0] = 1.0;
        if plan.k_cut > 0 {
            let records = self.sampler.sample_many(plan.copies.n1 as usize, rng);
            let a_hat = magnitude_sq_estimates(&records)?;
            for idx in 1..coefficients.values().len() {
                if PauliString::from_index(n, idx).weight() > plan.k_cut {
                    continue;
                }
                let mag = magnitude_estimate(a_hat.values()[idx]);
                if mag > plan.epsilon {
                    let (sign, _) = majority_sign(self.truth.values()[idx], plan.copies.n2, rng);
                    coefficients.values_mut()[idx] = sign as f64 * mag;
                }
            }
        }
        let operator = coefficients.to_operator();
        Ok(BellEstimate { plan: *plan, coefficients, operator })
    }
}

/// One line per record, tokens `P+ P- F+ F-` separated by spaces.
pub fn write_bell_records<W: Write>(mut out: W, records: &[BellOutcomeRecord]) -> Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

/// Inverse of [`write_bell_records`]; blank lines and `#` comments are skipped.
pub fn read_bell_records<R: BufRead>(input: R) -> Result<Vec<BellOutcomeRecord>> {
    let mut out: Vec<BellOutcomeRecord> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let r: BellOutcomeRecord = t.parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if out.first().is_some_and(|f| f.len() != r.len()) {
            return Err(Error::Parse(format!("line {}: record length differs", lineno + 1)));
        }
        out.push(r);
    }
    Ok(out)
}
