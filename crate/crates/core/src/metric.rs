//! The local quantum W1 norm and the local norm it is dual to.
//!
//! For a traceless Hermitian `Δ` on a register of `n` qubits and a penalty
//! schedule `1 = c_1 ≤ … ≤ c_n`,
//!
//! ```text
//! ‖Δ‖_W1loc = min Σ_x a_x   subject to   ‖Tr_{Λᶜ} Δ‖₁ / (2 c_|Λ|) ≤ Σ_{x∈Λ} a_x,   a ≥ 0,
//! ```
//!
//! one constraint per nonempty region `Λ`. The dual program puts a weight
//! `t_Λ ≥ 0` on each region, maximizes `Σ_Λ ‖Tr_{Λᶜ} Δ‖₁ t_Λ`, and asks
//! `2 Σ_{Λ∋x} c_|Λ| t_Λ ≤ 1` at every site. Both programs are solved with
//! [`crate::lp::solve`], so each reported value carries a duality-gap
//! certificate.
//!
//! Regions are subsets of the operator's support; "site `x`" refers to a
//! qubit label in that support.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::operator::{HermitianOperator, QubitSet};

/// Tolerance on `|Tr Δ|`.
pub const TRACELESS_TOL: f64 = 1e-10;
/// Regions whose marginal trace norm is at most this are dropped from the LP.
pub const PRUNE_TOL: f64 = 1e-12;
const DECOMPOSITION_TOL: f64 = 1e-9;

/// Penalty coefficients `c_1, …, c_m`, indexed by region size.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySchedule {
    coeffs: Vec<f64>,
}

impl PenaltySchedule {
    /// Requires `c_1 = 1`, nondecreasing and finite coefficients.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.first() {
            None => return Err(Error::InvalidSchedule("empty schedule".into())),
            Some(&c1) if (c1 - 1.0).abs() > 1e-12 => {
                return Err(Error::InvalidSchedule(format!("c_1 must equal 1, got {c1}")))
            }
            _ => {}
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite coefficient".into()));
        }
        if let Some(l) = coeffs.windows(2).position(|w| w[1] < w[0] * (1.0 - 1e-12)) {
            return Err(Error::InvalidSchedule(format!(
                "coefficients must be nondecreasing: c_{} = {} > c_{} = {}",
                l + 1,
                coeffs[l],
                l + 2,
                coeffs[l + 1]
            )));
        }
        Ok(Self { coeffs })
    }

    /// `c_l = c^{l−1} / l`; monotone exactly when `c ≥ 2`.
    pub fn geometric(c: f64, n: usize) -> Result<Self> {
        if c.is_nan() || c < 2.0 || !c.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "geometric schedule needs c ≥ 2 so that c^l/(l+1) ≥ c^(l-1)/l for every l; got c = {c}"
            )));
        }
        Self::new((1..=n).map(|l| c.powi(l as i32 - 1) / l as f64).collect())
    }

    pub fn constant_one(n: usize) -> Self {
        Self { coeffs: vec![1.0; n.max(1)] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `c_l` for `1 ≤ l ≤ len`.
    pub fn coefficient(&self, l: usize) -> f64 {
        assert!(l >= 1 && l <= self.coeffs.len(), "region size {l} outside schedule 1..={}", self.coeffs.len());
        self.coeffs[l - 1]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn check_covers(&self, n: usize) -> Result<()> {
        if self.coeffs.len() < n {
            return Err(Error::InvalidSchedule(format!(
                "schedule has {} coefficients but the operator acts on {n} qubits",
                self.coeffs.len()
            )));
        }
        Ok(())
    }
}

/// `‖Tr_{Λᶜ} Δ‖₁` for every nonempty region `Λ` of the support.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalNorms {
    support: QubitSet,
    entries: Vec<(QubitSet, f64)>,
}

impl MarginalNorms {
    pub fn support(&self) -> QubitSet {
        self.support
    }

    /// Regions in submask-enumeration order with their norms.
    pub fn iter(&self) -> impl Iterator<Item = (QubitSet, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, region: QubitSet) -> Option<f64> {
        self.entries.iter().find(|(r, _)| *r == region).map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Fails with [`Error::NotTraceless`] when `|Tr Δ| > 1e-10`.
pub fn marginal_trace_norms(delta: &HermitianOperator) -> Result<MarginalNorms> {
    check_traceless(delta)?;
    let support = delta.support();
    let regions: Vec<QubitSet> = support.nonempty_subsets().collect();
    let entries = regions
        .into_par_iter()
        .map(|r| {
            let m = delta.partial_trace(r).expect("region inside support");
            (r, m.trace_norm())
        })
        .collect();
    Ok(MarginalNorms { support, entries })
}

fn check_traceless(delta: &HermitianOperator) -> Result<()> {
    let tr = delta.trace();
    if tr.abs() > TRACELESS_TOL {
        return Err(Error::NotTraceless(tr));
    }
    Ok(())
}

/// Optimum of the primal program with the site weights `a_x`, listed in
/// ascending label order.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalSolution {
    pub value: f64,
    pub assignment: Vec<f64>,
}

/// Optimum of the dual program with its region weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    pub value: f64,
    pub weights: Vec<(QubitSet, f64)>,
}

fn prepare(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<(MarginalNorms, Vec<(QubitSet, f64)>)> {
    schedule.check_covers(delta.num_qubits())?;
    let norms = marginal_trace_norms(delta)?;
    let active = norms.iter().filter(|&(_, v)| v > PRUNE_TOL).collect();
    Ok((norms, active))
}

fn optimal(sol: lp::LpSolution) -> Result<lp::LpSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        other => Err(Error::InvalidParameter(format!("W1loc program reported {other}"))),
    }
}

/// `‖Δ‖_W1loc` from the primal program.
pub fn w1loc_primal(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<PrimalSolution> {
    let support = delta.support();
    let n = support.len();
    let (_, active) = prepare(delta, schedule)?;
    if active.is_empty() {
        return Ok(PrimalSolution { value: 0.0, assignment: vec![0.0; n] });
    }
    let sites = support.to_vec();
    let rows = active
        .iter()
        .map(|(r, _)| sites.iter().map(|&x| if r.contains(x) { 1.0 } else { 0.0 }).collect())
        .collect();
    let bounds = active.iter().map(|&(r, v)| v / (2.0 * schedule.coefficient(r.len()))).collect();
    let program = LinearProgram::new(vec![1.0; n], rows, bounds)?;
    let sol = optimal(lp::solve(&program)?)?;
    Ok(PrimalSolution { value: sol.primal_value.max(0.0), assignment: sol.primal })
}

/// `‖Δ‖_W1loc` from the dual program.
pub fn w1loc_dual(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<DualSolution> {
    let sites = delta.support().to_vec();
    let (_, active) = prepare(delta, schedule)?;
    if active.is_empty() {
        return Ok(DualSolution { value: 0.0, weights: Vec::new() });
    }
    // max w·t  s.t.  −2 Σ_{Λ∋x} c_|Λ| t_Λ ≥ −1, written as min (−w)·t.
    let objective = active.iter().map(|&(_, v)| -v).collect();
    let rows = sites
        .iter()
        .map(|&x| {
            active
                .iter()
                .map(|&(r, _)| if r.contains(x) { -2.0 * schedule.coefficient(r.len()) } else { 0.0 })
                .collect()
        })
        .collect();
    let program = LinearProgram::new(objective, rows, vec![-1.0; sites.len()])?;
    let sol = optimal(lp::solve(&program)?)?;
    let weights = active.iter().zip(sol.primal).map(|(&(r, _), t)| (r, t)).collect();
    Ok(DualSolution { value: (-sol.primal_value).max(0.0), weights })
}

/// Shorthand for the primal optimum.
pub fn w1loc(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    w1loc_primal(delta, schedule).map(|s| s.value)
}

fn region_ratio(schedule: &PenaltySchedule, r: QubitSet, v: f64) -> f64 {
    v / (2.0 * r.len() as f64 * schedule.coefficient(r.len()))
}

/// `Σ_x max_{Λ∋x} ‖Tr_{Λᶜ}Δ‖₁ / (2|Λ| c_|Λ|)`, an LP-free upper bound.
pub fn w1loc_upper_bound(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    schedule.check_covers(delta.num_qubits())?;
    let norms = marginal_trace_norms(delta)?;
    Ok(delta
        .support()
        .iter()
        .map(|x| {
            norms
                .iter()
                .filter(|(r, _)| r.contains(x))
                .map(|(r, v)| region_ratio(schedule, r, v))
                .fold(0.0, f64::max)
        })
        .sum())
}

/// The looser `n · max_Λ ‖Tr_{Λᶜ}Δ‖₁ / (2|Λ| c_|Λ|)`.
pub fn w1loc_uniform_upper_bound(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    schedule.check_covers(delta.num_qubits())?;
    let norms = marginal_trace_norms(delta)?;
    let worst = norms.iter().map(|(r, v)| region_ratio(schedule, r, v)).fold(0.0, f64::max);
    Ok(delta.num_qubits() as f64 * worst)
}

/// Bound `n / (k c_k)` for two states whose marginals on every region of
/// size below `k` coincide.
pub fn locally_indistinguishable_bound(n: usize, k: usize, schedule: &PenaltySchedule) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={n}, got {k}")));
    }
    schedule.check_covers(n)?;
    Ok(n as f64 / (k as f64 * schedule.coefficient(k)))
}

/// `‖Δ‖₁ / (2 c_n)`, a lower bound on `‖Δ‖_W1loc`.
pub fn trace_norm_lower_bound(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    let n = delta.num_qubits();
    schedule.check_covers(n)?;
    Ok(delta.trace_norm() / (2.0 * schedule.coefficient(n.max(1))))
}

/// `H = Σ_Λ H_Λ`, checked against the target operator at construction.
#[derive(Clone, Debug)]
pub struct LocalDecomposition {
    target: HermitianOperator,
    terms: Vec<HermitianOperator>,
}

impl LocalDecomposition {
    /// Fails with [`Error::InconsistentDecomposition`] if the embedded terms
    /// miss the target by more than `1e-9` in any entry.
    pub fn new(target: HermitianOperator, terms: Vec<HermitianOperator>) -> Result<Self> {
        let full = target.support();
        let mut sum = HermitianOperator::zeros(full);
        for t in &terms {
            sum = &sum + &t.embed(full)?;
        }
        let defect = sum.max_abs_diff(&target);
        if defect > DECOMPOSITION_TOL {
            return Err(Error::InconsistentDecomposition(defect));
        }
        Ok(Self { target, terms })
    }

    /// Builds the target from the terms, on `full`.
    pub fn from_terms(full: QubitSet, terms: Vec<HermitianOperator>) -> Result<Self> {
        let mut sum = HermitianOperator::zeros(full);
        for t in &terms {
            sum = &sum + &t.embed(full)?;
        }
        Self::new(sum, terms)
    }

    /// The single term `H_[n] = H`.
    pub fn whole(target: HermitianOperator) -> Self {
        Self { terms: vec![target.clone()], target }
    }

    pub fn target(&self) -> &HermitianOperator {
        &self.target
    }

    pub fn terms(&self) -> &[HermitianOperator] {
        &self.terms
    }
}

/// `2 max_x Σ_{Λ∋x} c_|Λ| ‖H_Λ‖∞` for the given decomposition, an upper
/// bound on the local norm of its target.
pub fn local_norm_of_decomposition(d: &LocalDecomposition, schedule: &PenaltySchedule) -> Result<f64> {
    let full = d.target.support();
    schedule.check_covers(full.len())?;
    let weighted: Vec<(QubitSet, f64)> = d
        .terms
        .iter()
        .filter(|t| !t.support().is_empty())
        .map(|t| (t.support(), schedule.coefficient(t.support().len()) * t.operator_norm()))
        .collect();
    let worst = full
        .iter()
        .map(|x| weighted.iter().filter(|(s, _)| s.contains(x)).map(|&(_, w)| w).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(2.0 * worst)
}

/// `Tr[Δ H]`.
pub fn pairing(delta: &HermitianOperator, h: &HermitianOperator) -> Result<f64> {
    delta.trace_product(h)
}

/// `|Tr[Δ H]| / ‖Δ‖_W1loc`, a lower bound on the local norm of `H`.
pub fn local_norm_lower_bound(delta: &HermitianOperator, h: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    let w = w1loc(delta, schedule)?;
    if w <= PRUNE_TOL {
        return Err(Error::InvalidParameter("Δ has zero W1loc norm".into()));
    }
    Ok(pairing(delta, h)?.abs() / w)
}

/// `max_x 2‖H − I_x ⊗ Tr_x H / 2‖∞`, an upper bound on the Lipschitz
/// constant of `H`.
pub fn lipschitz_upper_bound(h: &HermitianOperator) -> Result<f64> {
    let full = h.support();
    let mut best: f64 = 0.0;
    for x in full.iter() {
        let rest = full.difference(QubitSet::singleton(x));
        let k = h.partial_trace(rest)?.scale(0.5).embed(full)?;
        best = best.max(2.0 * (h - &k).operator_norm());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{DensityMatrix, Pauli, PauliString};
    use crate::states::{basis_state, ghz, haar_random_pure, random_traceless, seeded_rng, GhzSign};
    use approx::assert_abs_diff_eq;

    fn geo(n: usize) -> PenaltySchedule {
        PenaltySchedule::geometric(4.0, n).unwrap()
    }

    #[test]
    fn geometric_schedule_examples() {
        let s = geo(3);
        assert_abs_diff_eq!(s.coefficient(1), 1.0);
        assert_abs_diff_eq!(s.coefficient(2), 2.0);
        assert_abs_diff_eq!(s.coefficient(3), 16.0 / 3.0, epsilon = 1e-15);
        assert_eq!(PenaltySchedule::geometric(2.0, 2).unwrap().coefficients(), &[1.0, 1.0]);
        assert!(matches!(PenaltySchedule::geometric(1.5, 3), Err(Error::InvalidSchedule(_))));
        assert!(PenaltySchedule::new(vec![2.0]).is_err());
        assert!(PenaltySchedule::new(vec![1.0, 3.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_trace() {
        let id = HermitianOperator::identity(QubitSet::range(2));
        assert!(matches!(marginal_trace_norms(&id), Err(Error::NotTraceless(_))));
    }

    #[test]
    fn ghz_marginals() {
        let n = 4;
        let d = ghz(n, GhzSign::Plus).unwrap().difference(&ghz(n, GhzSign::Minus).unwrap()).unwrap();
        let norms = marginal_trace_norms(&d).unwrap();
        assert_eq!(norms.len(), 15);
        for (r, v) in norms.iter() {
            if r.len() < n {
                assert!(v < 1e-10, "{r}: {v}");
            } else {
                assert_abs_diff_eq!(v, 2.0, epsilon = 1e-10);
            }
        }
        let s = geo(n);
        assert_abs_diff_eq!(w1loc(&d, &s).unwrap(), 1.0 / 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(w1loc_upper_bound(&d, &s).unwrap(), 1.0 / 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(locally_indistinguishable_bound(n, n, &s).unwrap(), 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn single_qubit_is_half_trace_norm() {
        let mut rng = seeded_rng(1);
        for _ in 0..10 {
            let d = random_traceless(1, &mut rng);
            let s = PenaltySchedule::constant_one(1);
            assert_abs_diff_eq!(w1loc(&d, &s).unwrap(), d.trace_norm() / 2.0, epsilon = 1e-10);
            let dual = w1loc_dual(&d, &s).unwrap();
            assert_abs_diff_eq!(dual.weights[0].1, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_operator() {
        let z = HermitianOperator::zeros(QubitSet::range(3));
        let s = geo(3);
        assert_eq!(w1loc(&z, &s).unwrap(), 0.0);
        assert_eq!(w1loc_dual(&z, &s).unwrap().value, 0.0);
    }

    #[test]
    fn hamming_small() {
        let x = basis_state(&[false, true, true]).unwrap();
        let y = basis_state(&[true, true, false]).unwrap();
        let d = x.difference(&y).unwrap();
        for s in [geo(3), PenaltySchedule::constant_one(3)] {
            assert_abs_diff_eq!(w1loc(&d, &s).unwrap(), 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn schedule_too_short() {
        let d = random_traceless(3, &mut seeded_rng(2));
        assert!(w1loc(&d, &geo(2)).is_err());
    }

    #[test]
    fn decomposition_norms() {
        let n = 3;
        let full = QubitSet::range(n);
        let terms: Vec<HermitianOperator> = (0..n)
            .map(|i| HermitianOperator::diagonal(QubitSet::singleton(i), &[1.0, -1.0]).unwrap())
            .collect();
        let d = LocalDecomposition::from_terms(full, terms).unwrap();
        assert_abs_diff_eq!(local_norm_of_decomposition(&d, &geo(n)).unwrap(), 2.0);
        let h = d.target().clone();
        let whole = LocalDecomposition::whole(h.clone());
        assert_abs_diff_eq!(local_norm_of_decomposition(&whole, &geo(n)).unwrap(), 2.0 * geo(n).coefficient(n) * 3.0, epsilon = 1e-12);
        let bad = LocalDecomposition::new(h, vec![HermitianOperator::identity(QubitSet::singleton(0))]);
        assert!(matches!(bad, Err(Error::InconsistentDecomposition(_))));
    }

    #[test]
    fn pairing_examples() {
        let rho = haar_random_pure(2, 5).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let d = rho.difference(&sigma).unwrap();
        assert_abs_diff_eq!(pairing(&d, &HermitianOperator::identity(QubitSet::range(2))).unwrap(), 0.0, epsilon = 1e-12);
        let p: PauliString = "XZ".parse().unwrap();
        assert_abs_diff_eq!(pairing(&d, &p.matrix()).unwrap(), rho.expectation(&p) - sigma.expectation(&p), epsilon = 1e-12);
        let lb = local_norm_lower_bound(&d, &p.matrix(), &geo(2)).unwrap();
        let ub = local_norm_of_decomposition(&LocalDecomposition::whole(p.matrix()), &geo(2)).unwrap();
        assert!(lb <= ub + 1e-9);
    }

    #[test]
    fn lipschitz_bound_of_single_site_pauli() {
        let z = PauliString::single(2, 0, Pauli::Z).matrix();
        assert_abs_diff_eq!(lipschitz_upper_bound(&z).unwrap(), 2.0, epsilon = 1e-12);
    }
}
