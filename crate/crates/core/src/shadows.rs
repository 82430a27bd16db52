//! Classical shadows from random single-qubit Pauli measurements.
//!
//! A shadow records, for every qubit, which of `X`, `Y`, `Z` was measured
//! and the `±1` outcome. Its operator is `⊗_i (3|b_i⟩⟨b_i| − I)`, but that
//! matrix is only built on request; expectations of Pauli strings factorize
//! site by site and are read off the record in `O(n)`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::{
    pauli_coefficients, CMatrix, DensityMatrix, HermitianOperator, Pauli, PauliCoefficients, PauliString, QubitSet, C64,
};

/// Largest register handled by [`exact_shadow_mean`] and
/// [`enumerate_shadow_distribution`].
pub const EXACT_SHADOW_MAX_QUBITS: usize = 3;

const MEASURED: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// One measured qubit: the basis and the `±1` outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShadowSite {
    basis: Pauli,
    outcome: i8,
}

impl ShadowSite {
    pub fn new(basis: Pauli, outcome: i8) -> Result<Self> {
        if basis == Pauli::I {
            return Err(Error::InvalidParameter("shadow basis must be X, Y or Z".into()));
        }
        if outcome != 1 && outcome != -1 {
            return Err(Error::InvalidParameter(format!("outcome must be ±1, got {outcome}")));
        }
        Ok(Self { basis, outcome })
    }

    pub fn basis(self) -> Pauli {
        self.basis
    }

    pub fn outcome(self) -> i8 {
        self.outcome
    }

    /// Eigenvector of the basis Pauli with eigenvalue `outcome`.
    fn eigenvector(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = self.outcome as f64;
        match self.basis {
            Pauli::Z if self.outcome == 1 => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            Pauli::Z => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            Pauli::X => [C64::new(h, 0.0), C64::new(s * h, 0.0)],
            Pauli::Y => [C64::new(h, 0.0), C64::new(0.0, s * h)],
            Pauli::I => unreachable!("validated at construction"),
        }
    }

    /// `3|b⟩⟨b| − I`.
    fn factor(self) -> CMatrix {
        let v = self.eigenvector();
        CMatrix::from_fn(2, 2, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            v[i] * v[j].conj() * 3.0 - C64::new(id, 0.0)
        })
    }

    /// `Tr[σ (3|b⟩⟨b| − I)]`.
    fn weight(self, letter: Pauli) -> f64 {
        match letter {
            Pauli::I => 1.0,
            l if l == self.basis => 3.0 * self.outcome as f64,
            _ => 0.0,
        }
    }
}

impl fmt::Display for ShadowSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.basis.as_char(), if self.outcome == 1 { '+' } else { '-' })
    }
}

impl FromStr for ShadowSite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let (Some(b), Some(o), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(Error::Parse(format!("bad shadow token {s:?}")));
        };
        let basis = match b {
            'X' => Pauli::X,
            'Y' => Pauli::Y,
            'Z' => Pauli::Z,
            _ => return Err(Error::Parse(format!("bad shadow basis in {s:?}"))),
        };
        let outcome = match o {
            '+' => 1,
            '-' | '−' => -1,
            _ => return Err(Error::Parse(format!("bad shadow outcome in {s:?}"))),
        };
        ShadowSite::new(basis, outcome)
    }
}

/// A single classical shadow of an `n`-qubit state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliPrimitiveShadow {
    sites: Vec<ShadowSite>,
}

impl PauliPrimitiveShadow {
    pub fn new(sites: Vec<ShadowSite>) -> Self {
        Self { sites }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[ShadowSite] {
        &self.sites
    }

    /// `(basis x-mask, basis z-mask, outcome −1 mask)` in the bit layout of
    /// [`PauliString::masks`].
    fn masks(&self) -> (usize, usize, usize) {
        let n = self.sites.len();
        let mut x = 0;
        let mut z = 0;
        let mut minus = 0;
        for (i, s) in self.sites.iter().enumerate() {
            let bit = 1usize << (n - 1 - i);
            let (bx, bz) = s.basis.xz();
            if bx {
                x |= bit;
            }
            if bz {
                z |= bit;
            }
            if s.outcome == -1 {
                minus |= bit;
            }
        }
        (x, z, minus)
    }
}

impl fmt::Display for PauliPrimitiveShadow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.sites.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliPrimitiveShadow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sites = s.split_whitespace().map(str::parse).collect::<Result<Vec<_>>>()?;
        if sites.is_empty() {
            return Err(Error::Parse("empty shadow record".into()));
        }
        Ok(Self { sites })
    }
}

/// Measures every qubit of `ρ` in a uniformly random Pauli basis.
///
/// Outcomes are drawn one qubit at a time from the conditional Born
/// distribution given the outcomes already fixed, which reproduces the joint
/// distribution of the product measurement exactly.
pub fn sample_shadow<R: Rng + ?Sized>(rho: &DensityMatrix, rng: &mut R) -> PauliPrimitiveShadow {
    let n = rho.num_qubits();
    let mut m = rho.matrix().clone();
    let mut sites = Vec::with_capacity(n);
    for _ in 0..n {
        let basis = MEASURED[rng.random_range(0..3)];
        let d = m.nrows();
        let half = d / 2;
        // Reduced 2×2 state of the leading qubit.
        let mut r = [[C64::new(0.0, 0.0); 2]; 2];
        for (a, row) in r.iter_mut().enumerate() {
            for (b, slot) in row.iter_mut().enumerate() {
                for i in 0..half {
                    *slot += m[(a * half + i, b * half + i)];
                }
            }
        }
        let plus = ShadowSite { basis, outcome: 1 };
        let v = plus.eigenvector();
        let p_plus = (v[0].conj() * r[0][0] * v[0]
            + v[0].conj() * r[0][1] * v[1]
            + v[1].conj() * r[1][0] * v[0]
            + v[1].conj() * r[1][1] * v[1])
            .re
            / (r[0][0].re + r[1][1].re);
        let outcome = if rng.random::<f64>() < p_plus { 1 } else { -1 };
        let site = ShadowSite { basis, outcome };
        sites.push(site);
        // Condition on the outcome and discard the measured qubit.
        let v = site.eigenvector();
        let mut next = CMatrix::zeros(half, half);
        for i in 0..half {
            for j in 0..half {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        acc += v[a].conj() * m[(a * half + i, b * half + j)] * v[b];
                    }
                }
                next[(i, j)] = acc;
            }
        }
        let tr: f64 = (0..half).map(|i| next[(i, i)].re).sum();
        if tr > 0.0 {
            next /= C64::new(tr, 0.0);
        }
        m = next;
    }
    PauliPrimitiveShadow { sites }
}

/// `N` independent shadows.
pub fn sample_shadows<R: Rng + ?Sized>(rho: &DensityMatrix, count: usize, rng: &mut R) -> Vec<PauliPrimitiveShadow> {
    (0..count).map(|_| sample_shadow(rho, rng)).collect()
}

/// The dense operator `⊗_i (3|b_i⟩⟨b_i| − I)` on `0..n`.
pub fn shadow_to_operator(s: &PauliPrimitiveShadow) -> HermitianOperator {
    let n = s.len();
    let mut acc = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for site in &s.sites {
        acc = acc.kronecker(&site.factor());
    }
    HermitianOperator::new(QubitSet::range(n), acc).expect("product of Hermitian factors")
}

/// `Tr[P ρ̂]` for the shadow `ρ̂`, without building any matrix.
pub fn shadow_expectation(s: &PauliPrimitiveShadow, p: &PauliString) -> f64 {
    assert_eq!(s.len(), p.len(), "shadow and Pauli string lengths differ");
    s.sites.iter().zip(p.letters()).map(|(site, &l)| site.weight(l)).product()
}

/// Every `(shadow, probability)` pair for `ρ`, over all `6^n` basis and
/// outcome assignments.
pub fn enumerate_shadow_distribution(rho: &DensityMatrix) -> Result<Vec<(PauliPrimitiveShadow, f64)>> {
    let n = rho.num_qubits();
    if n > EXACT_SHADOW_MAX_QUBITS {
        return Err(Error::CapExceeded { what: "exact shadow enumeration", n, cap: EXACT_SHADOW_MAX_QUBITS });
    }
    let m = rho.matrix();
    let d = 1usize << n;
    let mut out = Vec::with_capacity(6usize.pow(n as u32));
    for code in 0..6usize.pow(n as u32) {
        let mut c = code;
        let mut sites = Vec::with_capacity(n);
        for _ in 0..n {
            let basis = MEASURED[(c % 6) / 2];
            let outcome = if c % 2 == 0 { 1 } else { -1 };
            sites.push(ShadowSite { basis, outcome });
            c /= 6;
        }
        sites.reverse();
        // Born weight ⟨b|ρ|b⟩ with |b⟩ = ⊗ eigenvectors.
        let mut psi = vec![C64::new(1.0, 0.0)];
        for s in &sites {
            let v = s.eigenvector();
            psi = psi.iter().flat_map(|&a| [a * v[0], a * v[1]]).collect();
        }
        let mut born = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                born += psi[i].conj() * m[(i, j)] * psi[j];
            }
        }
        let prob = born.re / 3f64.powi(n as i32);
        out.push((PauliPrimitiveShadow { sites }, prob));
    }
    Ok(out)
}

/// `𝔼[ρ̂]` over the exact shadow distribution; `n ≤ 3`.
pub fn exact_shadow_mean(rho: &DensityMatrix) -> Result<HermitianOperator> {
    let n = rho.num_qubits();
    let mut acc = HermitianOperator::zeros(QubitSet::range(n));
    for (s, p) in enumerate_shadow_distribution(rho)? {
        if p != 0.0 {
            acc = &acc + &shadow_to_operator(&s).scale(p);
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    EmpiricalMean,
    MedianOfMeans { batches: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorReport {
    pub kind: EstimatorKind,
    /// Shadows actually used (after truncation to a multiple of the batch count).
    pub shadow_count: usize,
    /// Set when trailing shadows were dropped to make the batches equal.
    pub truncated: bool,
    pub targets: Vec<PauliString>,
    pub estimates: Vec<f64>,
}

fn check_lengths(shadows: &[PauliPrimitiveShadow], targets: &[PauliString]) -> Result<()> {
    let Some(first) = shadows.first() else {
        return Err(Error::InvalidParameter("no shadows supplied".into()));
    };
    let n = first.len();
    if shadows.iter().any(|s| s.len() != n) || targets.iter().any(|p| p.len() != n) {
        return Err(Error::InvalidParameter("shadow and target lengths differ".into()));
    }
    Ok(())
}

fn batch_mean(shadows: &[PauliPrimitiveShadow], p: &PauliString) -> f64 {
    shadows.iter().map(|s| shadow_expectation(s, p)).sum::<f64>() / shadows.len() as f64
}

/// `(1/N) Σ_i Tr[P ρ̂_i]` for each target.
pub fn empirical_mean_estimate(shadows: &[PauliPrimitiveShadow], targets: &[PauliString]) -> Result<EstimatorReport> {
    check_lengths(shadows, targets)?;
    Ok(EstimatorReport {
        kind: EstimatorKind::EmpiricalMean,
        shadow_count: shadows.len(),
        truncated: false,
        targets: targets.to_vec(),
        estimates: targets.iter().map(|p| batch_mean(shadows, p)).collect(),
    })
}

/// Median of `K` batch means. With `N` not divisible by `K`, only the first
/// `⌊N/K⌋·K` shadows are used and `truncated` is set.
pub fn median_of_means_estimate(
    shadows: &[PauliPrimitiveShadow],
    batches: usize,
    targets: &[PauliString],
) -> Result<EstimatorReport> {
    check_lengths(shadows, targets)?;
    if batches == 0 || batches > shadows.len() {
        return Err(Error::InvalidParameter(format!(
            "batch count {batches} must lie in 1..={}",
            shadows.len()
        )));
    }
    let size = shadows.len() / batches;
    let used = size * batches;
    let estimates = targets
        .iter()
        .map(|p| {
            let means: Vec<f64> = shadows[..used].chunks(size).map(|c| batch_mean(c, p)).collect();
            median(&means)
        })
        .collect();
    Ok(EstimatorReport {
        kind: EstimatorKind::MedianOfMeans { batches },
        shadow_count: used,
        truncated: used != shadows.len(),
        targets: targets.to_vec(),
        estimates,
    })
}

/// Median of a nonempty slice; the mean of the two middle values for even
/// lengths.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// `⌈x⌉` that ignores relative round-off below `1e-12`, so that formulas
/// evaluating to an exact integer do not jump to the next one.
pub(crate) fn ceil_count(x: f64) -> u64 {
    (x - x.abs() * 1e-12).ceil().max(1.0) as u64
}

fn check_accuracy(m: usize, delta: f64, epsilon: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {epsilon}")));
    }
    Ok(())
}

/// `⌈3^{k+1} ln(2M/δ) / ε²⌉` shadows suffice to estimate `M` Pauli strings of
/// weight at most `k` to accuracy `ε`, all at once, with probability `1 − δ`.
pub fn required_shadow_count(k: usize, m: usize, delta: f64, epsilon: f64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_accuracy(m, delta, epsilon)?;
    let x = 3f64.powi(k as i32 + 1) * (2.0 * m as f64 / delta).ln() / (epsilon * epsilon);
    Ok(ceil_count(x))
}

/// `Σ_{i=1}^{k} C(n, i) 3^i`, the number of Pauli strings of weight `1..=k`.
pub fn pauli_count_up_to_weight(n: usize, k: usize) -> usize {
    let mut binom = 1usize;
    let mut total = 0;
    for i in 1..=k.min(n) {
        binom = binom * (n + 1 - i) / i;
        total += binom * 3usize.pow(i as u32);
    }
    total
}

/// Union-bound Bernstein tail `2M exp(−ε² N / 3^{k+1})` for the event that
/// some weight-≤k estimate misses by more than `ε`.
pub fn bernstein_failure_bound(k: usize, m: usize, epsilon: f64, shadows: u64) -> f64 {
    2.0 * m as f64 * (-(epsilon * epsilon) * shadows as f64 / 3f64.powi(k as i32 + 1)).exp()
}

/// Empirical-mean estimates of all Pauli coefficients of weight at most
/// `k_cut` (others set to zero), with `⟨I⟩ = 1`.
pub fn shadow_coefficients(shadows: &[PauliPrimitiveShadow], k_cut: usize) -> Result<PauliCoefficients> {
    check_lengths(shadows, &[])?;
    let n = shadows[0].len();
    if k_cut > n {
        return Err(Error::InvalidParameter(format!("k_cut {k_cut} exceeds n = {n}")));
    }
    let full = (1usize << n) - 1;
    let pow3: Vec<f64> = (0..=n).map(|w| 3f64.powi(w as i32)).collect();
    let mut coeffs = PauliCoefficients::zeros(QubitSet::range(n));
    let values = coeffs.values_mut();
    for s in shadows {
        let (x, z, minus) = s.masks();
        // Every sub-support of the shadow, including the empty one.
        let mut sub = full;
        loop {
            let w = sub.count_ones() as usize;
            if w <= k_cut {
                let sign = if (sub & minus).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                values[((sub & x) << n) | (sub & z)] += sign * pow3[w];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & full;
        }
    }
    let inv = 1.0 / shadows.len() as f64;
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(coeffs)
}

/// `(1/2^n) Σ_{|P| ≤ k_cut} P̂ P` with `P̂` the empirical mean over shadows.
pub fn shadow_state_estimate(shadows: &[PauliPrimitiveShadow], k_cut: usize) -> Result<HermitianOperator> {
    Ok(shadow_coefficients(shadows, k_cut)?.to_operator())
}

/// Exact Pauli coefficients of `ρ` truncated to weight `k_cut`.
pub fn truncated_coefficients(rho: &DensityMatrix, k_cut: usize) -> PauliCoefficients {
    let mut c = pauli_coefficients(rho.op());
    let n = rho.num_qubits();
    for (i, v) in c.values_mut().iter_mut().enumerate() {
        if PauliString::from_index(n, i).weight() > k_cut {
            *v = 0.0;
        }
    }
    c
}

/// One line per shadow, tokens `X+ X- Y+ Y- Z+ Z-` separated by spaces.
pub fn write_shadow_records<W: Write>(mut out: W, shadows: &[PauliPrimitiveShadow]) -> Result<()> {
    for s in shadows {
        writeln!(out, "{s}")?;
    }
    Ok(())
}

/// Inverse of [`write_shadow_records`]; blank lines and `#` comments are
/// skipped, and every record must have the same length.
pub fn read_shadow_records<R: BufRead>(input: R) -> Result<Vec<PauliPrimitiveShadow>> {
    let mut out: Vec<PauliPrimitiveShadow> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let s: PauliPrimitiveShadow = t.parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if let Some(first) = out.first() {
            if first.len() != s.len() {
                return Err(Error::Parse(format!("line {}: record length {} differs from {}", lineno + 1, s.len(), first.len())));
            }
        }
        out.push(s);
    }
    Ok(out)
}
