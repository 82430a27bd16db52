//! Property suite for the local W1 norm.
//!
//! Each property is evaluated as a slack that is `≥ 0` exactly when the
//! property holds within its tolerance. The suite emits one row per
//! property per instance (metric = property name, value = slack) and a
//! `<property>.violations` summary row per property.

use rand::Rng;
use rayon::prelude::*;

use super::{trial_rng, Check, ExperimentConfig, Rows, RunOutput};
use crate::channel::SingleQubitChannel;
use crate::error::Result;
use crate::metric::{trace_norm_lower_bound, w1loc, w1loc_dual, w1loc_primal, w1loc_upper_bound, PenaltySchedule};
use crate::operator::{DensityMatrix, HermitianOperator, QubitSet};
use crate::states::{basis_state, haar_random_pure_with, random_mixed_with, random_traceless};

pub const DUALITY_TOL: f64 = 1e-7;
pub const SANDWICH_TOL: f64 = 1e-9;
pub const SUPERADDITIVITY_TOL: f64 = 1e-8;
pub const ADDITIVITY_TOL: f64 = 1e-7;
pub const CONTRACTION_TOL: f64 = 1e-8;
pub const HAMMING_TOL: f64 = 1e-9;
const NORM_TOL: f64 = 1e-9;

/// `1e-7·max(1, v) − |primal − dual|`.
pub fn duality_slack(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    let p = w1loc_primal(delta, schedule)?.value;
    let d = w1loc_dual(delta, schedule)?.value;
    Ok(DUALITY_TOL * p.abs().max(1.0) - (p - d).abs())
}

/// `(lower, upper)` slacks of `‖Δ‖₁/(2c_n) ≤ ‖Δ‖_W1loc ≤ UB(Δ)`.
pub fn sandwich_slacks(delta: &HermitianOperator, schedule: &PenaltySchedule) -> Result<(f64, f64)> {
    let w = w1loc(delta, schedule)?;
    let lower = w - trace_norm_lower_bound(delta, schedule)? + SANDWICH_TOL;
    let upper = w1loc_upper_bound(delta, schedule)? - w + SANDWICH_TOL;
    Ok((lower, upper))
}

/// `‖λΔ‖ = |λ| ‖Δ‖`.
pub fn homogeneity_slack(delta: &HermitianOperator, lambda: f64, schedule: &PenaltySchedule) -> Result<f64> {
    let w = w1loc(delta, schedule)?;
    let scaled = w1loc(&delta.scale(lambda), schedule)?;
    Ok(NORM_TOL * w.max(1.0) * lambda.abs().max(1.0) - (scaled - lambda.abs() * w).abs())
}

/// `‖A + B‖ ≤ ‖A‖ + ‖B‖`.
pub fn triangle_slack(a: &HermitianOperator, b: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    Ok(w1loc(a, schedule)? + w1loc(b, schedule)? - w1loc(&(a + b), schedule)? + NORM_TOL)
}

/// `‖ρ − σ‖ ≥ ‖ρ_A − σ_A‖ + ‖ρ_B − σ_B‖` for `A = 0..m`, `B` the rest.
pub fn superadditivity_slack(rho: &DensityMatrix, sigma: &DensityMatrix, m: usize, schedule: &PenaltySchedule) -> Result<f64> {
    let n = rho.num_qubits();
    let a = QubitSet::range(m);
    let b = QubitSet::range(n).difference(a);
    let whole = w1loc(&rho.difference(sigma)?, schedule)?;
    let left = w1loc(&(&rho.marginal(a)? - &sigma.marginal(a)?), schedule)?;
    let right = w1loc(&(&rho.marginal(b)? - &sigma.marginal(b)?), schedule)?;
    Ok(whole - left - right + SUPERADDITIVITY_TOL)
}

/// `‖ρ₁⊗ρ₂ − σ₁⊗σ₂‖ = ‖ρ₁ − σ₁‖ + ‖ρ₂ − σ₂‖`.
pub fn additivity_slack(
    rho1: &DensityMatrix,
    sigma1: &DensityMatrix,
    rho2: &DensityMatrix,
    sigma2: &DensityMatrix,
    schedule: &PenaltySchedule,
) -> Result<f64> {
    let joint = rho1.tensor(rho2)?.difference(&sigma1.tensor(sigma2)?)?;
    let whole = w1loc(&joint, schedule)?;
    let parts = w1loc(&rho1.difference(sigma1)?, schedule)? + w1loc(&rho2.difference(sigma2)?, schedule)?;
    Ok(ADDITIVITY_TOL - (whole - parts).abs())
}

/// `‖Φ_q(Δ)‖ ≤ ‖Δ‖` for a channel `Φ` on qubit `q`.
pub fn contraction_slack(
    delta: &HermitianOperator,
    channel: &SingleQubitChannel,
    qubit: usize,
    schedule: &PenaltySchedule,
) -> Result<f64> {
    let mapped = channel.apply(delta, qubit)?;
    // Kraus application keeps the trace only up to round-off; project it out.
    let shift = mapped.trace() / mapped.dim() as f64;
    let mapped = &mapped - &HermitianOperator::identity(mapped.support()).scale(shift);
    Ok(w1loc(delta, schedule)? - w1loc(&mapped, schedule)? + CONTRACTION_TOL)
}

/// `‖Δ₁ ⊗ Δ₂‖ ≤ ‖Δ₁‖ ‖Δ₂‖₁` with `Δ₂` relabelled after `Δ₁`.
pub fn tensor_bound_slack(d1: &HermitianOperator, d2: &HermitianOperator, schedule: &PenaltySchedule) -> Result<f64> {
    let shifted = crate::operator::shift_labels(d2, d1.support().len());
    let joint = d1.tensor(&shifted)?;
    Ok(w1loc(d1, schedule)? * d2.trace_norm() - w1loc(&joint, schedule)? + CONTRACTION_TOL)
}

/// `1e-9 − |‖|x⟩⟨x| − |y⟩⟨y|‖ − h(x, y)|` for every ordered pair of basis
/// states on `n` qubits, as `(x, y, slack)`.
pub fn hamming_slacks(n: usize, schedule: &PenaltySchedule) -> Result<Vec<(usize, usize, f64)>> {
    let bits = |x: usize| (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect::<Vec<_>>();
    let states = (0..1usize << n).map(|x| basis_state(&bits(x))).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..states.len()).flat_map(|x| (0..states.len()).map(move |y| (x, y))).collect();
    pairs
        .into_par_iter()
        .map(|(x, y)| {
            let w = w1loc(&states[x].difference(&states[y])?, schedule)?;
            let h = (x ^ y).count_ones() as f64;
            Ok((x, y, HAMMING_TOL - (w - h).abs()))
        })
        .collect()
}

/// Random single-qubit channel: depolarizing, amplitude damping or unitary
/// by `kind % 3`.
pub fn random_channel<R: Rng + ?Sized>(kind: usize, rng: &mut R) -> SingleQubitChannel {
    match kind % 3 {
        0 => SingleQubitChannel::depolarizing(rng.random_range(0.0..=1.0)).expect("p in range"),
        1 => SingleQubitChannel::amplitude_damping(rng.random_range(0.0..=1.0)).expect("γ in range"),
        _ => SingleQubitChannel::random_unitary(rng),
    }
}

/// Random traceless operator: a GUE draw for even `kind`, a difference of
/// random states for odd `kind`.
pub fn random_delta<R: Rng + ?Sized>(n: usize, kind: usize, rng: &mut R) -> Result<HermitianOperator> {
    if kind.is_multiple_of(2) {
        Ok(random_traceless(n, rng))
    } else {
        random_state(n, rng)?.difference(&random_state(n, rng)?)
    }
}

/// Haar-pure or Ginibre mixed state with random rank.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rng.random_bool(0.3) {
        haar_random_pure_with(n, rng)
    } else {
        let rank = rng.random_range(1..=1usize << n);
        random_mixed_with(n, rank, rng)
    }
}

const PROPERTIES: [&str; 10] = [
    "duality",
    "sandwich_lower",
    "sandwich_upper",
    "homogeneity",
    "triangle",
    "superadditivity",
    "additivity",
    "contraction",
    "tensor_bound",
    "hamming",
];

fn instance(cfg: &ExperimentConfig, schedule: &PenaltySchedule, i: usize) -> Result<Vec<(&'static str, f64)>> {
    let n = cfg.n;
    let mut rng = trial_rng(cfg.seed, 0, i);
    let delta = random_delta(n, i, &mut rng)?;
    let (lower, upper) = sandwich_slacks(&delta, schedule)?;
    let lambda = rng.random_range(-3.0..3.0);
    let other = random_delta(n, i + 1, &mut rng)?;
    let qubit = rng.random_range(0..n);
    let channel = random_channel(i, &mut rng);
    let mut out = vec![
        ("duality", duality_slack(&delta, schedule)?),
        ("sandwich_lower", lower),
        ("sandwich_upper", upper),
        ("homogeneity", homogeneity_slack(&delta, lambda, schedule)?),
        ("triangle", triangle_slack(&delta, &other, schedule)?),
        ("contraction", contraction_slack(&delta, &channel, qubit, schedule)?),
    ];
    if n >= 2 {
        let m = n / 2;
        let (rho, sigma) = (random_state(n, &mut rng)?, random_state(n, &mut rng)?);
        out.push(("superadditivity", superadditivity_slack(&rho, &sigma, m, schedule)?));
        let (r1, s1) = (random_state(m, &mut rng)?, random_state(m, &mut rng)?);
        let (r2, s2) = (random_state(n - m, &mut rng)?, random_state(n - m, &mut rng)?);
        out.push(("additivity", additivity_slack(&r1, &s1, &r2, &s2, schedule)?));
        let d1 = random_delta(m, i, &mut rng)?;
        let d2 = random_delta(n - m, i + 1, &mut rng)?;
        out.push(("tensor_bound", tensor_bound_slack(&d1, &d2, schedule)?));
    }
    Ok(out)
}

pub fn run_property_suite(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let schedule = cfg.schedule()?;
    let rows = Rows::new(cfg);
    let per_instance: Vec<Vec<(&'static str, f64)>> =
        (0..cfg.trials).into_par_iter().map(|i| instance(cfg, &schedule, i)).collect::<Result<_>>()?;

    let mut out = RunOutput { rows: vec![rows.manifest()], checks: Vec::new() };
    let mut tally: Vec<(usize, usize)> = vec![(0, 0); PROPERTIES.len()];
    let mut record = |out: &mut RunOutput, trial: usize, name: &'static str, slack: f64| {
        out.rows.push(rows.row(0, Some(trial), name, slack));
        let idx = PROPERTIES.iter().position(|p| *p == name).expect("known property");
        tally[idx].0 += 1;
        if slack < 0.0 || slack.is_nan() {
            tally[idx].1 += 1;
        }
    };
    for (i, cases) in per_instance.into_iter().enumerate() {
        for (name, slack) in cases {
            record(&mut out, i, name, slack);
        }
    }
    if cfg.n <= 6 {
        // One exhaustive sweep, indexed by the pair code x·2^n + y.
        for s in [schedule.clone(), PenaltySchedule::constant_one(cfg.n)] {
            for (x, y, slack) in hamming_slacks(cfg.n, &s)? {
                record(&mut out, (x << cfg.n) | y, "hamming", slack);
            }
        }
    }
    for (name, (cases, violations)) in PROPERTIES.iter().zip(tally) {
        if cases == 0 {
            continue;
        }
        out.rows.push(rows.row(0, None, format!("{name}.violations"), violations as f64));
        out.checks.push(Check {
            name: (*name).to_string(),
            passed: violations == 0,
            detail: format!("{violations} violations in {cases} cases"),
        });
    }
    Ok(out)
}
