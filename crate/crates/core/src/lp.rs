//! Small dense linear programs in the form
//!
//! ```text
//! minimize c·a  subject to  G a ≥ h,  a ≥ 0
//! ```
//!
//! solved by a two-phase tableau simplex. Every optimum is returned with a
//! dual point read off the final reduced costs, and the pair is re-checked
//! against the original data before it is reported: a solution that fails
//! primal feasibility, dual feasibility or the duality-gap bound comes back
//! as [`LpError::Numerical`] rather than as a wrong optimum.

use std::fmt;

/// Primal feasibility tolerance (absolute, scaled by `max(1, |h|)`).
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Relative duality-gap tolerance.
pub const GAP_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_STREAK: usize = 40;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("numerically unreliable solution (primal violation {primal_violation:e}, dual violation {dual_violation:e}, gap {gap:e})")]
    Numerical { primal_violation: f64, dual_violation: f64, gap: f64 },
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    bounds: Vec<f64>,
}

impl LinearProgram {
    /// `rows[i] · a ≥ bounds[i]` for each `i`.
    pub fn new(objective: Vec<f64>, rows: Vec<Vec<f64>>, bounds: Vec<f64>) -> Result<Self, LpError> {
        let nv = objective.len();
        if rows.len() != bounds.len() {
            return Err(LpError::Malformed(format!(
                "{} constraint rows but {} bounds",
                rows.len(),
                bounds.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != nv) {
            return Err(LpError::Malformed(format!("row {i} has {} entries, expected {nv}", r.len())));
        }
        let all_finite = objective.iter().chain(bounds.iter()).chain(rows.iter().flatten()).all(|v| v.is_finite());
        if !all_finite {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        Ok(Self { objective, rows, bounds })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// Objective multiplied by `factor`.
    pub fn scaled_objective(&self, factor: f64) -> Self {
        Self {
            objective: self.objective.iter().map(|c| c * factor).collect(),
            rows: self.rows.clone(),
            bounds: self.bounds.clone(),
        }
    }

    /// `max(0, worst violation of G a ≥ h and a ≥ 0)`.
    pub fn primal_violation(&self, point: &[f64]) -> f64 {
        let mut worst = point.iter().fold(0.0f64, |w, &a| w.max(-a));
        for (row, &h) in self.rows.iter().zip(&self.bounds) {
            let lhs: f64 = row.iter().zip(point).map(|(g, a)| g * a).sum();
            worst = worst.max((h - lhs) / h.abs().max(1.0));
        }
        worst
    }

    /// `max(0, worst violation of Gᵀ y ≤ c and y ≥ 0)`.
    pub fn dual_violation(&self, dual: &[f64]) -> f64 {
        let mut worst = dual.iter().fold(0.0f64, |w, &y| w.max(-y));
        for (j, &c) in self.objective.iter().enumerate() {
            let gty: f64 = self.rows.iter().zip(dual).map(|(r, y)| r[j] * y).sum();
            worst = worst.max((gty - c) / c.abs().max(1.0));
        }
        worst
    }

    pub fn value_at(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, a)| c * a).sum()
    }

    pub fn dual_value_at(&self, dual: &[f64]) -> f64 {
        self.bounds.iter().zip(dual).map(|(h, y)| h * y).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

/// Result of [`solve`]. For non-optimal statuses the values are infinite
/// (`+∞` when infeasible, `−∞` when unbounded) and the points are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal_value: f64,
    pub primal: Vec<f64>,
    pub dual_value: f64,
    pub dual: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        let v = if status == LpStatus::Infeasible { f64::INFINITY } else { f64::NEG_INFINITY };
        Self { status, primal_value: v, primal: Vec::new(), dual_value: v, dual: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `|primal − dual|`.
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }
}

struct Tableau {
    /// Row-major `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Reduced costs for the current phase, length `cols`; `obj` is `-z`.
    d: Vec<f64>,
    obj: f64,
    blocked: Vec<bool>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.t[pr * w + pc];
        for v in &mut self.t[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for (v, &pv) in self.t[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.t[r * w + pc] = 0.0;
            }
        }
        let f = self.d[pc];
        if f != 0.0 {
            for (dj, &pv) in self.d.iter_mut().zip(&pivot_row[..self.cols]) {
                *dj -= f * pv;
            }
            self.obj -= f * pivot_row[self.cols];
            self.d[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.d = costs.to_vec();
        self.obj = 0.0;
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for c in 0..self.cols {
                    self.d[c] -= cb * self.at(r, c);
                }
                self.obj -= cb * self.rhs(r);
            }
        }
    }

    fn run(&mut self, max_iter: usize) -> Result<Outcome, LpError> {
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -COST_TOL;
            for c in 0..self.cols {
                if self.blocked[c] || self.d[c] >= -COST_TOL {
                    continue;
                }
                if bland {
                    enter = Some(c);
                    break;
                }
                if self.d[c] < best {
                    best = self.d[c];
                    enter = Some(c);
                }
            }
            let Some(pc) = enter else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
        Err(LpError::IterationLimit(max_iter))
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width();
        self.t.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Solves `lp`; deterministic for a fixed input.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let nv = lp.num_vars();
    let m = lp.num_constraints();
    let needs_art: Vec<bool> = lp.bounds.iter().map(|&h| h > 0.0).collect();
    let nart = needs_art.iter().filter(|&&b| b).count();
    let cols = nv + m + nart;
    let w = cols + 1;
    let mut t = vec![0.0; m * w];
    let mut basis = vec![0usize; m];
    let mut row_of_constraint = vec![0usize; m];
    let mut next_art = nv + m;
    for i in 0..m {
        row_of_constraint[i] = i;
        let sign = if needs_art[i] { 1.0 } else { -1.0 };
        let row = &mut t[i * w..(i + 1) * w];
        for (slot, &g) in row[..nv].iter_mut().zip(&lp.rows[i]) {
            *slot = sign * g;
        }
        // surplus s_i has coefficient −1 in G a − s = h
        row[nv + i] = -sign;
        row[cols] = sign * lp.bounds[i];
        if needs_art[i] {
            row[next_art] = 1.0;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = nv + i;
        }
    }
    let mut tab = Tableau { t, rows: m, cols, basis, d: vec![0.0; cols], obj: 0.0, blocked: vec![false; cols] };
    let max_iter = 50 * (m + cols) + 1000;

    if nart > 0 {
        let mut phase1 = vec![0.0; cols];
        for c in phase1.iter_mut().skip(nv + m) {
            *c = 1.0;
        }
        tab.set_costs(&phase1);
        tab.run(max_iter)?;
        let infeasibility = -tab.obj;
        let scale = lp.bounds.iter().fold(1.0f64, |s, h| s.max(h.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        // Drive remaining artificials out of the basis.
        let mut r = 0;
        while r < tab.rows {
            if tab.basis[r] >= nv + m {
                let candidate = (0..nv + m).find(|&c| tab.at(r, c).abs() > 1e-9);
                match candidate {
                    Some(c) => {
                        tab.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        tab.remove_row(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for c in tab.blocked.iter_mut().skip(nv + m) {
            *c = true;
        }
    }

    let mut costs = vec![0.0; cols];
    costs[..nv].copy_from_slice(&lp.objective);
    tab.set_costs(&costs);
    match tab.run(max_iter)? {
        Outcome::Unbounded => return Ok(LpSolution::non_optimal(LpStatus::Unbounded)),
        Outcome::Optimal => {}
    }

    let mut primal = vec![0.0; nv];
    for r in 0..tab.rows {
        let b = tab.basis[r];
        if b < nv {
            primal[b] = tab.rhs(r).max(0.0);
        }
    }
    // Reduced cost of surplus s_i equals the dual multiplier of constraint i.
    let dual: Vec<f64> = (0..m).map(|i| tab.d[nv + row_of_constraint[i]].max(0.0)).collect();

    let primal_value = lp.value_at(&primal);
    let dual_value = lp.dual_value_at(&dual);
    let primal_violation = lp.primal_violation(&primal);
    let dual_violation = lp.dual_violation(&dual);
    let gap = (primal_value - dual_value).abs();
    if primal_violation > FEASIBILITY_TOL
        || dual_violation > FEASIBILITY_TOL
        || gap > GAP_TOL * primal_value.abs().max(1.0)
    {
        return Err(LpError::Numerical { primal_violation, dual_violation, gap });
    }
    Ok(LpSolution { status: LpStatus::Optimal, primal_value, primal, dual_value, dual })
}
