//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use localw1::bell::{bell_record_probability, BellCalibration, BellLabel, BellOutcomeRecord, BellPlan};
use localw1::experiments::bell_campaign::bell_truncation;
use localw1::experiments::props::{
    additivity_slack, contraction_slack, hamming_slacks, random_channel, random_delta, random_state,
    sandwich_slacks, superadditivity_slack, tensor_bound_slack, ADDITIVITY_TOL, SANDWICH_TOL,
    SUPERADDITIVITY_TOL,
};
use localw1::experiments::stats::{failure_rate_consistent, loglog_slope};
use localw1::experiments::{self, trial_rng, ExperimentConfig, ExperimentKind, RunOutput};
use localw1::metric::{w1loc_dual, w1loc_primal, PenaltySchedule};
use localw1::operator::{HermitianOperator, PauliString, QubitSet};
use localw1::shadows::{
    enumerate_shadow_distribution, exact_shadow_mean, pauli_count_up_to_weight, required_shadow_count,
    sample_shadows, shadow_coefficients, shadow_expectation,
};
use localw1::states::{seeded_rng, StateSpec};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn geometric(n: usize) -> PenaltySchedule {
    PenaltySchedule::geometric(4.0, n).unwrap()
}

/// Per-instance values shared by criteria 1 and 3.
struct LpInstance {
    n: usize,
    primal: f64,
    dual: f64,
    lower_slack: f64,
    upper_slack: f64,
}

fn lp_instances() -> &'static [LpInstance] {
    static CELL: OnceLock<Vec<LpInstance>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cases: Vec<(usize, usize)> = (2..=5).flat_map(|n| (0..200).map(move |i| (n, i))).collect();
        cases
            .into_par_iter()
            .map(|(n, i)| {
                let mut rng = trial_rng(1, n, i);
                let delta = random_delta(n, i, &mut rng).unwrap();
                let s = geometric(n);
                let (lower_slack, upper_slack) = sandwich_slacks(&delta, &s).unwrap();
                LpInstance {
                    n,
                    primal: w1loc_primal(&delta, &s).unwrap().value,
                    dual: w1loc_dual(&delta, &s).unwrap().value,
                    lower_slack: lower_slack - SANDWICH_TOL,
                    upper_slack: upper_slack - SANDWICH_TOL,
                }
            })
            .collect()
    })
}

fn criterion_1() -> Outcome {
    let inst = lp_instances();
    let (mut worst, mut bad) = (0.0f64, 0);
    for x in inst {
        let gap = (x.primal - x.dual).abs();
        worst = worst.max(gap / x.primal.abs().max(1.0));
        if gap > 1e-7 * x.primal.abs().max(1.0) {
            bad += 1;
        }
    }
    let per_n: Vec<usize> = (2..=5).map(|n| inst.iter().filter(|x| x.n == n).count()).collect();
    outcome(bad == 0, format!("LP duality on {per_n:?} instances at n=2..5, {bad} over tolerance, worst relative gap {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, s) in [("geometric(4)", geometric(4)), ("constant-one", PenaltySchedule::constant_one(4))] {
        let slacks = hamming_slacks(4, &s).unwrap();
        let worst = slacks.iter().map(|&(_, _, sl)| 1e-9 - sl).fold(0.0, f64::max);
        let bad = slacks.iter().filter(|x| x.2 < 0.0).count();
        ok &= bad == 0;
        detail.push(format!("{name}: {} pairs, max |w − h| {worst:.1e}", slacks.len()));
    }
    outcome(ok, format!("Hamming recovery at n=4, {}", detail.join("; ")))
}

fn criterion_3() -> Outcome {
    let inst = lp_instances();
    let lower = inst.iter().map(|x| x.lower_slack).fold(f64::INFINITY, f64::min);
    let upper = inst.iter().map(|x| x.upper_slack).fold(f64::INFINITY, f64::min);
    outcome(
        lower >= -1e-9 && upper >= -1e-9,
        format!("sandwich on {} instances, min lower slack {lower:.3e}, min upper slack {upper:.3e}", inst.len()),
    )
}

fn criterion_4() -> Outcome {
    let res: Vec<(f64, f64)> = (0..100)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(4, 0, i);
            let s = geometric(4);
            let (r1, s1, r2, s2) = (
                random_state(2, &mut rng).unwrap(),
                random_state(2, &mut rng).unwrap(),
                random_state(2, &mut rng).unwrap(),
                random_state(2, &mut rng).unwrap(),
            );
            // Undo the tolerances folded into the slacks: |difference| and raw margin.
            let add_err = ADDITIVITY_TOL - additivity_slack(&r1, &s1, &r2, &s2, &s).unwrap();
            let (rho, sigma) = (random_state(4, &mut rng).unwrap(), random_state(4, &mut rng).unwrap());
            let margin = superadditivity_slack(&rho, &sigma, 2, &s).unwrap() - SUPERADDITIVITY_TOL;
            (add_err, margin)
        })
        .collect();
    let worst_add = res.iter().map(|x| x.0).fold(0.0, f64::max);
    let worst_sup = res.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    outcome(
        worst_add <= 1e-7 && worst_sup >= -1e-8,
        format!("100 instances at m=n=2, max additivity error {worst_add:.2e}, min superadditivity margin {worst_sup:.3e}"),
    )
}

fn criterion_5() -> Outcome {
    let contraction: Vec<f64> = (0..2500)
        .into_par_iter()
        .map(|i| {
            let (channel_idx, delta_idx) = (i / 50, i % 50);
            let mut crng = trial_rng(5, 0, channel_idx);
            let channel = random_channel(channel_idx, &mut crng);
            let mut rng = trial_rng(5, 1, i);
            let n = 1 + delta_idx % 4;
            let delta = random_delta(n, delta_idx, &mut rng).unwrap();
            let q = rng.random_range(0..n);
            contraction_slack(&delta, &channel, q, &geometric(n)).unwrap()
        })
        .collect();
    let tensor: Vec<f64> = (0..2500)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(5, 2, i);
            let total = 2 + i % 3;
            let n1 = rng.random_range(1..total);
            let d1 = random_delta(n1, i, &mut rng).unwrap();
            let d2 = random_delta(total - n1, i + 1, &mut rng).unwrap();
            tensor_bound_slack(&d1, &d2, &geometric(total)).unwrap()
        })
        .collect();
    let bad_c = contraction.iter().filter(|&&s| s < 0.0).count();
    let bad_t = tensor.iter().filter(|&&s| s < 0.0).count();
    outcome(
        bad_c == 0 && bad_t == 0,
        format!("contraction: {bad_c} violations in 2500 cases; tensor bound: {bad_t} violations in 2500 cases"),
    )
}

fn criterion_6() -> Outcome {
    let worst = (0..20)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(6, 0, i);
            let rho = random_state(1 + i % 3, &mut rng).unwrap();
            exact_shadow_mean(&rho).unwrap().max_abs_diff(rho.op())
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst <= 1e-10, format!("20 states at n=1..3, max |E[ρ̂] − ρ| {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    const SAMPLES: usize = 100_000;
    let mut exact_ok = true;
    let mut worst_exact = f64::NEG_INFINITY;
    for n in 1..=3 {
        for seed in 0..3 {
            let rho = random_state(n, &mut seeded_rng(70 + seed + 10 * n as u64)).unwrap();
            let dist = enumerate_shadow_distribution(&rho).unwrap();
            for p in PauliString::all(n).filter(|p| p.weight() > 0) {
                let m1: f64 = dist.iter().map(|(s, w)| w * shadow_expectation(s, &p)).sum();
                let m2: f64 = dist.iter().map(|(s, w)| w * shadow_expectation(s, &p).powi(2)).sum();
                let bound = 3f64.powi(p.weight() as i32);
                worst_exact = worst_exact.max((m2 - m1 * m1) - bound);
                exact_ok &= m2 - m1 * m1 <= bound + 1e-10;
            }
        }
    }
    let mut worst_rel = 0.0f64;
    let mut checked = 0;
    for n in [2, 3] {
        let rho = random_state(n, &mut seeded_rng(700 + n as u64)).unwrap();
        let dist = enumerate_shadow_distribution(&rho).unwrap();
        let shadows = sample_shadows(&rho, SAMPLES, &mut seeded_rng(7000 + n as u64));
        for p in PauliString::all(n).filter(|p| p.weight() > 0) {
            let m1: f64 = dist.iter().map(|(s, w)| w * shadow_expectation(s, &p)).sum();
            let m2: f64 = dist.iter().map(|(s, w)| w * shadow_expectation(s, &p).powi(2)).sum();
            let exact = m2 - m1 * m1;
            let xs: Vec<f64> = shadows.iter().map(|s| shadow_expectation(s, &p)).collect();
            let mean = xs.iter().sum::<f64>() / SAMPLES as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (SAMPLES - 1) as f64;
            worst_rel = worst_rel.max((var - exact).abs() / exact);
            checked += 1;
        }
    }
    outcome(
        exact_ok && worst_rel <= 0.05,
        format!(
            "exact variance − 3^k at most {worst_exact:.3e} (n ≤ 3, all Paulis); empirical vs exact over {SAMPLES} samples, {checked} Paulis, worst relative deviation {:.2}%",
            100.0 * worst_rel
        ),
    )
}

fn criterion_8() -> Outcome {
    let (n, k, eps, delta) = (4, 2, 0.2, 0.1);
    let m = pauli_count_up_to_weight(n, k);
    let targets: Vec<PauliString> = PauliString::up_to_weight(n, k).filter(|p| p.weight() > 0).collect();
    let count = required_shadow_count(k, m, delta, eps).unwrap();
    let rho = random_state(n, &mut seeded_rng(8)).unwrap();
    let failures = (0..100)
        .into_par_iter()
        .filter(|&t| {
            let shadows = sample_shadows(&rho, count as usize, &mut trial_rng(8, 0, t));
            let est = shadow_coefficients(&shadows, k).unwrap();
            let err = targets.iter().map(|p| (est.get(p) - rho.expectation(p)).abs()).fold(0.0, f64::max);
            err > eps
        })
        .count() as u64;
    let ok = targets.len() == m && failures_ok(failures, 100, delta);
    outcome(
        ok,
        format!("n=4, k=2, M={m} ({} targets), ε=0.2, N={count}: {failures}/100 trials exceed ε", targets.len()),
    )
}

fn failures_ok(failures: u64, trials: u64, delta: f64) -> bool {
    failure_rate_consistent(failures, trials, delta, 0.99)
}

fn campaign(kind: ExperimentKind, n: usize, edit: impl FnOnce(&mut ExperimentConfig)) -> RunOutput {
    let mut cfg = ExperimentConfig::new(kind, n);
    cfg.seed = 9;
    edit(&mut cfg);
    experiments::run(&cfg).unwrap()
}

fn summaries(out: &RunOutput) -> String {
    out.checks.iter().map(|c| format!("[{}: {}]", c.name, c.detail)).collect::<Vec<_>>().join(" ")
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [4, 5] {
        let out = campaign(ExperimentKind::ShadowConverge, n, |c| c.w = vec![0.5, 0.3]);
        ok &= out.checks.len() == 2 && out.passed();
        detail.push(format!("n={n} {}", summaries(&out)));
    }
    let sweep = campaign(ExperimentKind::ShadowConverge, 4, |c| c.shadow_counts = vec![100, 200, 400, 700, 1000]);
    ok &= sweep.checks.len() == 1 && sweep.passed();
    detail.push(summaries(&sweep));
    outcome(ok, detail.join(" "))
}

/// `Pr[S] = Tr[(⊗_k Π_{S_k}) (ρ ⊗ ρ)]` from dense projectors at `n = 2`.
fn dense_bell_probability(rho: &localw1::operator::DensityMatrix, labels: [BellLabel; 2]) -> f64 {
    let n = 2;
    let rr = rho.tensor(rho).unwrap();
    let mut proj: Option<HermitianOperator> = None;
    for (k, l) in labels.into_iter().enumerate() {
        let v: Vec<_> = l.vector().iter().map(|&x| num_complex::Complex64::new(x, 0.0)).collect();
        let p = HermitianOperator::projector(QubitSet::new([k, n + k]).unwrap(), &v).unwrap();
        proj = Some(match proj {
            None => p,
            Some(q) => q.tensor(&p).unwrap(),
        });
    }
    proj.unwrap().trace_product(rr.op()).unwrap()
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_prob = 0.0f64;
    for seed in 0..5u64 {
        let rho = random_state(2, &mut seeded_rng(100 + seed)).unwrap();
        let records: Vec<[BellLabel; 2]> =
            BellLabel::ALL.iter().flat_map(|&a| BellLabel::ALL.iter().map(move |&b| [a, b])).collect();
        let probs: Vec<f64> = records.iter().map(|r| dense_bell_probability(&rho, *r)).collect();
        for (r, &p) in records.iter().zip(&probs) {
            let lib = bell_record_probability(&rho, &BellOutcomeRecord::new(r.to_vec())).unwrap();
            worst_prob = worst_prob.max((lib - p).abs());
        }
        for p in PauliString::all(2) {
            let mean: f64 = records
                .iter()
                .zip(&probs)
                .map(|(r, &w)| w * BellOutcomeRecord::new(r.to_vec()).product_sign(&p) as f64)
                .sum();
            worst = worst.max((mean - rho.expectation(&p).powi(2)).abs());
        }
    }
    let desk = campaign(ExperimentKind::BellConverge, 4, |c| c.w = vec![0.5]);
    let ws = [0.5, 0.35, 0.25];
    let copies: Vec<f64> = ws
        .iter()
        .map(|&w| {
            let k = bell_truncation(w, 4.0, 4);
            BellPlan::from_accuracy(4, k, w, 0.1, BellCalibration::default()).unwrap().copies.total() as f64
        })
        .collect();
    let slope = loglog_slope(&ws, &copies);
    let ok = worst <= 1e-10 && worst_prob <= 1e-10 && desk.checks.len() == 1 && desk.passed() && (-4.6..=-3.4).contains(&slope);
    outcome(
        ok,
        format!(
            "n=2 enumerated E[â] error {worst:.1e} (record probabilities vs dense projectors {worst_prob:.1e}); desk check {}; copies {copies:?} slope {slope:.3}",
            summaries(&desk)
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in 2..=5 {
        let out = campaign(ExperimentKind::GibbsCheck, n, |c| c.trials = 25);
        ok &= out.checks.len() == 2 && out.passed();
        detail.push(format!("n={n} {}", summaries(&out)));
    }
    outcome(ok, format!("100 pairs: {}", detail.join(" ")))
}

fn criterion_12() -> Outcome {
    let configs: Vec<ExperimentConfig> = {
        let mk = |kind, n, f: &dyn Fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::new(kind, n);
            c.seed = 12;
            c.trials = 8;
            f(&mut c);
            c
        };
        vec![
            mk(ExperimentKind::ShadowConverge, 3, &|c| c.w = vec![0.6, 0.4]),
            mk(ExperimentKind::ShadowConverge, 3, &|c| c.shadow_counts = vec![50, 100]),
            mk(ExperimentKind::BellConverge, 3, &|c| c.w = vec![0.6]),
            mk(ExperimentKind::W1locEval, 3, &|c| c.state = Some(StateSpec::GhzPlus(3))),
            mk(ExperimentKind::Props, 3, &|_| {}),
            mk(ExperimentKind::GibbsCheck, 3, &|_| {}),
        ]
    };
    let pools = [1, 4].map(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap());
    let mut same = 0;
    for cfg in &configs {
        let a = pools[0].install(|| experiments::run(cfg).unwrap().to_csv());
        let b = pools[1].install(|| experiments::run(cfg).unwrap().to_csv());
        let c = experiments::run(cfg).unwrap().to_csv();
        if a == b && b == c {
            same += 1;
        }
    }
    outcome(
        same == configs.len(),
        format!("{same}/{} campaigns byte-identical across three runs (1, 4 and default worker threads)", configs.len()),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("LP duality", criterion_1),
        ("Hamming recovery", criterion_2),
        ("metric sandwich", criterion_3),
        ("additivity and superadditivity", criterion_4),
        ("contraction and tensor bound", criterion_5),
        ("shadow unbiasedness", criterion_6),
        ("shadow variance bound", criterion_7),
        ("Pauli estimation desk check", criterion_8),
        ("shadow convergence desk check", criterion_9),
        ("Bell estimator", criterion_10),
        ("Gibbs identity and Hölder chain", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {name} ({:.1}s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
