//! Convergence of the Bell-protocol estimate in the local W1 metric.
//!
//! For each target `w` the Pauli accuracy is `ε = w` and the truncation
//! weight is `k = ⌈−ln w / ln(c/2)⌉` (clamped to `1..=n`); the copy counts
//! come from [`required_copies_bell`](crate::bell::required_copies_bell) with
//! `M` the number of Pauli strings of weight `1..=k`.

use rayon::prelude::*;

use super::stats::{failure_rate_consistent, loglog_slope, median};
use super::{campaign_metric, trial_rng, Check, ExperimentConfig, Rows, RunOutput, ScheduleKind};
use crate::bell::{BellPlan, BellSource};
use crate::error::Result;

/// `⌈−ln w / ln(c/2)⌉`, clamped to `1..=n`.
pub fn bell_truncation(w: f64, c: f64, n: usize) -> usize {
    let x = -w.ln() / (c / 2.0).ln();
    // Round-off must not push an exact integer such as log₂ 4 to the next one.
    let k = (x - x.abs() * 1e-12).ceil();
    if k.is_finite() {
        (k.max(1.0) as usize).min(n)
    } else {
        n
    }
}

pub fn run_bell_convergence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n = cfg.n;
    let rho = cfg.state_spec().build()?;
    let schedule = cfg.schedule()?;
    let source = BellSource::new(&rho)?;
    let rows = Rows::new(cfg);
    let mut out = RunOutput { rows: vec![rows.manifest()], checks: Vec::new() };
    let guaranteed = cfg.schedule == ScheduleKind::Geometric && cfg.c > 2.0;

    let targets = cfg.targets();
    let mut copies = Vec::with_capacity(targets.len());
    for (group, &w) in targets.iter().enumerate() {
        let k = bell_truncation(w, cfg.c, n);
        let plan = BellPlan::from_accuracy(n, k, w, cfg.delta, cfg.calibration())?;
        let total = plan.copies.total();
        copies.push(total as f64);
        let values: Vec<(&'static str, f64)> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, group, t);
                let est = source.estimate(&plan, &mut rng)?;
                campaign_metric(&est.operator.try_sub(rho.op())?, &schedule, cfg.metric, cfg.lp_cap)
            })
            .collect::<Result<_>>()?;

        out.rows.push(rows.row(total, None, "target_w", w));
        out.rows.push(rows.row(total, None, "k", k as f64));
        out.rows.push(rows.row(total, None, "N1", plan.copies.n1 as f64));
        out.rows.push(rows.row(total, None, "N2", plan.copies.votes() as f64));
        for (t, (label, v)) in values.iter().enumerate() {
            out.rows.push(rows.row(total, Some(t), *label, *v));
        }
        let metric: Vec<f64> = values.iter().map(|x| x.1).collect();
        out.rows.push(rows.row(total, None, "median", median(&metric)));
        let failures = metric.iter().filter(|&&v| v > w).count() as u64;
        out.rows.push(rows.row(total, None, "success_fraction", 1.0 - failures as f64 / cfg.trials as f64));
        let ok = failure_rate_consistent(failures, cfg.trials as u64, cfg.delta, 0.99);
        out.rows.push(rows.row(total, None, "binomial_pass", ok as u8 as f64));
        if guaranteed {
            out.checks.push(Check {
                name: format!("bell-converge w={w}"),
                passed: ok,
                detail: format!("k={k} copies={total} failures {failures}/{} (δ = {})", cfg.trials, cfg.delta),
            });
        }
    }
    if targets.len() >= 2 {
        out.rows.push(rows.row(0, None, "copies_slope", loglog_slope(&targets, &copies)));
    }
    Ok(out)
}
