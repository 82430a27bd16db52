//! Symmetrized relative entropy of Gibbs states and its local-W1 bound.
//!
//! For Gibbs states `ω_H`, `ω_K` of chain Hamiltonians,
//! `S(ω_H‖ω_K) + S(ω_K‖ω_H) = Tr[(ω_H − ω_K)(K − H)]`, and the right side is
//! at most `‖ω_H − ω_K‖_W1loc` times the local norm of `K − H`, which is in
//! turn bounded by its bond decomposition. Each trial reports
//!
//! * `identity_residual`: `|S(ω_H‖ω_K) + S(ω_K‖ω_H) − Tr[(ω_H − ω_K)(K − H)]|`
//! * `holder_slack`: `Tr[(ω_H − ω_K)(K − H)] − ‖ω_H − ω_K‖_W1loc · ‖K − H‖_bonds`
//!
//! and both must be at most `1e-8`.

use rayon::prelude::*;

use super::{trial_rng, Check, ExperimentConfig, Rows, RunOutput};
use crate::error::Result;
use crate::metric::{local_norm_of_decomposition, pairing, w1loc, LocalDecomposition, PenaltySchedule};
use crate::operator::QubitSet;
use crate::states::{gibbs, gibbs_log, ChainHamiltonian};

pub const GIBBS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GibbsCase {
    pub entropy_sum: f64,
    pub pairing: f64,
    pub w1loc: f64,
    pub local_norm: f64,
}

impl GibbsCase {
    pub fn identity_residual(&self) -> f64 {
        (self.entropy_sum - self.pairing).abs()
    }

    pub fn holder_slack(&self) -> f64 {
        self.pairing - self.w1loc * self.local_norm
    }
}

pub fn gibbs_case(h: &ChainHamiltonian, k: &ChainHamiltonian, schedule: &PenaltySchedule) -> Result<GibbsCase> {
    let (ht, kt) = (h.total(), k.total());
    let (wh, wk) = (gibbs(&ht)?, gibbs(&kt)?);
    // S(ω_H‖ω_K) + S(ω_K‖ω_H) = Tr[(ω_H − ω_K)(log ω_H − log ω_K)].
    let log_ratio = gibbs_log(&ht)?.try_sub(&gibbs_log(&kt)?)?;
    let entropy_sum = wh.op().trace_product(&log_ratio)? - wk.op().trace_product(&log_ratio)?;
    let diff = wh.difference(&wk)?;
    let k_minus_h = k.difference(h)?;
    let pair = pairing(&diff, &k_minus_h.total())?;
    let decomposition = LocalDecomposition::from_terms(QubitSet::range(h.num_qubits()), k_minus_h.bonds().to_vec())?;
    Ok(GibbsCase {
        entropy_sum,
        pairing: pair,
        w1loc: w1loc(&diff, schedule)?,
        local_norm: local_norm_of_decomposition(&decomposition, schedule)?,
    })
}

pub fn run_gibbs_check(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let schedule = cfg.schedule()?;
    let rows = Rows::new(cfg);
    let cases: Vec<GibbsCase> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, 0, t);
            let h = ChainHamiltonian::random(cfg.n, &mut rng)?;
            let k = ChainHamiltonian::random(cfg.n, &mut rng)?;
            gibbs_case(&h, &k, &schedule)
        })
        .collect::<Result<_>>()?;

    let mut out = RunOutput { rows: vec![rows.manifest()], checks: Vec::new() };
    for (t, c) in cases.iter().enumerate() {
        out.rows.push(rows.row(0, Some(t), "entropy_sum", c.entropy_sum));
        out.rows.push(rows.row(0, Some(t), "identity_residual", c.identity_residual()));
        out.rows.push(rows.row(0, Some(t), "w1loc", c.w1loc));
        out.rows.push(rows.row(0, Some(t), "local_norm_bound", c.local_norm));
        out.rows.push(rows.row(0, Some(t), "holder_slack", c.holder_slack()));
    }
    let worst_residual = cases.iter().map(GibbsCase::identity_residual).fold(0.0, f64::max);
    let worst_slack = cases.iter().map(GibbsCase::holder_slack).fold(f64::NEG_INFINITY, f64::max);
    out.rows.push(rows.row(0, None, "identity_residual.max", worst_residual));
    out.rows.push(rows.row(0, None, "holder_slack.max", worst_slack));
    out.checks.push(Check {
        name: "gibbs identity".into(),
        passed: worst_residual <= GIBBS_TOL,
        detail: format!("max residual {worst_residual:e} over {} pairs", cfg.trials),
    });
    out.checks.push(Check {
        name: "gibbs holder bound".into(),
        passed: worst_slack <= GIBBS_TOL,
        detail: format!("max slack {worst_slack:e} over {} pairs", cfg.trials),
    });
    Ok(out)
}
