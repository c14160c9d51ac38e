// SPDX-License-Identifier: Apache-2.0

//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical variable `r_i` so the system reads
//! `A x - r = 0` with bounds on both `x` and `r`. Nonbasic variables sit at a
//! bound (or at zero when free). Phase 1 minimizes the sum of bound
//! infeasibilities of the basic variables starting from whatever basis is
//! supplied, which lets branch-and-bound re-enter from a parent basis after
//! tightening bounds. Pricing is Dantzig's rule with a Harris ratio test;
//! after a run of degenerate pivots the method switches to Bland's rule
//! until progress resumes.

use std::time::Instant;

use super::lu::LuFactor;
use super::model::{Model, Sense};

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub refactor_interval: usize,
    pub degenerate_limit: usize,
    pub max_iterations: Option<usize>,
    pub deadline: Option<Instant>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            refactor_interval: 100,
            degenerate_limit: 60,
            max_iterations: None,
            deadline: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

/// A simplex basis that can be handed back to warm-start a later solve.
#[derive(Clone, Debug)]
pub struct Basis {
    pub head: Vec<usize>,
    pub state: Vec<VarState>,
}

#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Structural variable values.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub basis: Basis,
}

/// Column-oriented copy of a model's constraint matrix.
#[derive(Clone, Debug)]
pub struct LpData {
    pub n: usize,
    pub m: usize,
    pub columns: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
}

impl LpData {
    pub fn from_model(model: &Model) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut columns = vec![Vec::new(); n];
        let mut row_lower = Vec::with_capacity(m);
        let mut row_upper = Vec::with_capacity(m);
        for (i, row) in model.rows.iter().enumerate() {
            for &(v, a) in &row.terms {
                if a != 0.0 {
                    columns[v.0].push((i, a));
                }
            }
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            row_lower.push(lo);
            row_upper.push(hi);
        }
        LpData {
            n,
            m,
            columns,
            cost: model.objective.clone(),
            lower: model.vars.iter().map(|v| v.lower).collect(),
            upper: model.vars.iter().map(|v| v.upper).collect(),
            row_lower,
            row_upper,
        }
    }

    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            self.columns[j].iter().map(|&(i, a)| a * y[i]).sum()
        } else {
            -y[j - self.n]
        }
    }

    fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut col = vec![0.0; self.m];
        if j < self.n {
            for &(i, a) in &self.columns[j] {
                col[i] = a;
            }
        } else {
            col[j - self.n] = -1.0;
        }
        col
    }

    fn sparse_column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.columns[j].clone()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }
}

struct Simplex<'a> {
    data: &'a LpData,
    lower: Vec<f64>,
    upper: Vec<f64>,
    head: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    lu: LuFactor,
    opts: &'a SimplexOptions,
    iterations: usize,
}

/// Solves the LP over `data` with the given structural bounds.
pub fn solve(
    data: &LpData,
    lower: &[f64],
    upper: &[f64],
    warm: Option<&Basis>,
    opts: &SimplexOptions,
) -> LpOutcome {
    let n = data.n;
    let m = data.m;
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    lo.extend_from_slice(&data.row_lower);
    hi.extend_from_slice(&data.row_upper);

    if lo.iter().zip(&hi).any(|(l, u)| l > u) {
        return LpOutcome {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::INFINITY,
            iterations: 0,
            basis: slack_basis(n, m, &lo, &hi),
        };
    }

    let basis = match warm {
        Some(b) if b.head.len() == m && b.state.len() == n + m => b.clone(),
        _ => slack_basis(n, m, &lo, &hi),
    };

    let mut s = Simplex {
        data,
        lower: lo,
        upper: hi,
        head: basis.head,
        state: basis.state,
        x: vec![0.0; n + m],
        lu: LuFactor::factorize(0, &[]).expect("empty factorization"),
        opts,
        iterations: 0,
    };
    s.fix_nonbasic_states();
    let status = s.run();
    let x: Vec<f64> = s.x[..n].to_vec();
    let objective = if status == LpStatus::Optimal {
        data.cost.iter().zip(&x).map(|(c, v)| c * v).sum()
    } else {
        f64::INFINITY
    };
    LpOutcome {
        status,
        x,
        objective,
        iterations: s.iterations,
        basis: Basis {
            head: s.head,
            state: s.state,
        },
    }
}

fn slack_basis(n: usize, m: usize, lo: &[f64], hi: &[f64]) -> Basis {
    let mut state = Vec::with_capacity(n + m);
    for j in 0..n {
        state.push(nonbasic_state(lo[j], hi[j], VarState::Lower));
    }
    state.extend(std::iter::repeat_n(VarState::Basic, m));
    Basis {
        head: (n..n + m).collect(),
        state,
    }
}

fn nonbasic_state(lo: f64, hi: f64, preferred: VarState) -> VarState {
    match preferred {
        VarState::Upper if hi.is_finite() => VarState::Upper,
        _ if lo.is_finite() => VarState::Lower,
        _ if hi.is_finite() => VarState::Upper,
        _ => VarState::Free,
    }
}

impl Simplex<'_> {
    fn fix_nonbasic_states(&mut self) {
        for j in 0..self.state.len() {
            let st = self.state[j];
            if st != VarState::Basic {
                self.state[j] = nonbasic_state(self.lower[j], self.upper[j], st);
            }
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Lower => self.lower[j],
            VarState::Upper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic => unreachable!("basic variable has no bound value"),
        }
    }

    /// Refactorizes the basis (repairing it with logicals if singular) and
    /// recomputes all primal values.
    fn refactor(&mut self) -> bool {
        let m = self.data.m;
        let n = self.data.n;
        for attempt in 0..3 {
            let cols: Vec<Vec<(usize, f64)>> =
                self.head.iter().map(|&j| self.data.sparse_column(j)).collect();
            match LuFactor::factorize(m, &cols) {
                Ok(lu) => {
                    self.lu = lu;
                    break;
                }
                Err(sing) => {
                    if attempt == 2 {
                        return false;
                    }
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.head[p];
                        self.state[out] = nonbasic_state(self.lower[out], self.upper[out], VarState::Lower);
                        let logical = n + r;
                        if self.state[logical] == VarState::Basic {
                            // Row is already covered elsewhere; cannot repair here.
                            return false;
                        }
                        self.head[p] = logical;
                        self.state[logical] = VarState::Basic;
                    }
                }
            }
        }
        for j in 0..n + m {
            if self.state[j] != VarState::Basic {
                self.x[j] = self.nonbasic_value(j);
            }
        }
        let mut rhs = vec![0.0; m];
        for j in 0..n + m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < n {
                for &(i, a) in &self.data.columns[j] {
                    rhs[i] -= a * v;
                }
            } else {
                rhs[j - n] += v;
            }
        }
        let xb = self.lu.ftran(rhs);
        for (p, &j) in self.head.iter().enumerate() {
            self.x[j] = xb[p];
        }
        true
    }

    fn run(&mut self) -> LpStatus {
        let n = self.data.n;
        let m = self.data.m;
        let tol = self.opts.feasibility_tol;
        let dtol = self.opts.optimality_tol;
        let max_iter = self.opts.max_iterations.unwrap_or(50 * (n + m) + 10_000);

        if !self.refactor() {
            return LpStatus::NumericalFailure;
        }
        let mut since_refactor = 0usize;
        let mut degenerate_run = 0usize;
        let mut final_checks = 0usize;

        loop {
            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }
            if self.iterations.is_multiple_of(32) {
                if let Some(deadline) = self.opts.deadline {
                    if Instant::now() >= deadline {
                        return LpStatus::TimeLimit;
                    }
                }
            }
            if since_refactor >= self.opts.refactor_interval
                || self.lu.eta_nnz() > 4 * self.lu.lu_nnz() + 10 * m
            {
                if !self.refactor() {
                    return LpStatus::NumericalFailure;
                }
                since_refactor = 0;
            }

            // Phase selection and basic cost vector.
            let mut cb = vec![0.0; m];
            let mut phase1 = false;
            for (p, &j) in self.head.iter().enumerate() {
                let v = self.x[j];
                if v < self.lower[j] - tol {
                    cb[p] = -1.0;
                    phase1 = true;
                } else if v > self.upper[j] + tol {
                    cb[p] = 1.0;
                    phase1 = true;
                }
            }
            if !phase1 {
                for (p, &j) in self.head.iter().enumerate() {
                    cb[p] = if j < n { self.data.cost[j] } else { 0.0 };
                }
            }
            let y = self.lu.btran(cb);

            // Pricing.
            let bland = degenerate_run > self.opts.degenerate_limit;
            let mut entering: Option<(usize, f64, f64)> = None; // (var, dir, |d|)
            for j in 0..n + m {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let c = if phase1 || j >= n { 0.0 } else { self.data.cost[j] };
                let d = c - self.data.dot_column(j, &y);
                let dir = match st {
                    VarState::Lower if d < -dtol => 1.0,
                    VarState::Upper if d > dtol => -1.0,
                    VarState::Free if d.abs() > dtol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d.abs()));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| d.abs() > best) {
                    entering = Some((j, dir, d.abs()));
                }
            }

            let Some((q, dir, _)) = entering else {
                // Verify with freshly computed primal values before declaring.
                if since_refactor > 0 && final_checks < 3 {
                    final_checks += 1;
                    if !self.refactor() {
                        return LpStatus::NumericalFailure;
                    }
                    since_refactor = 0;
                    continue;
                }
                return if phase1 {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            };

            let alpha = self.lu.ftran(self.data.dense_column(q));

            // Ratio test. Basic value at position p moves by -dir * alpha[p] per unit step.
            let flip_range = self.upper[q] - self.lower[q];
            let limit = |p: usize, harris: f64| -> Option<(f64, f64)> {
                let a = alpha[p];
                if a.abs() <= PIVOT_TOL {
                    return None;
                }
                let rate = -dir * a;
                let j = self.head[p];
                let v = self.x[j];
                let (lo, hi) = (self.lower[j], self.upper[j]);
                if rate < 0.0 {
                    let target = if phase1 && v > hi + tol {
                        hi
                    } else if v < lo - tol || !lo.is_finite() {
                        return None;
                    } else {
                        lo
                    };
                    Some((((v - target) + harris).max(0.0) / -rate, target))
                } else {
                    let target = if phase1 && v < lo - tol {
                        lo
                    } else if v > hi + tol || !hi.is_finite() {
                        return None;
                    } else {
                        hi
                    };
                    Some((((target - v) + harris).max(0.0) / rate, target))
                }
            };

            let mut leave: Option<(usize, f64, f64)> = None; // (pos, step, target)
            if bland {
                let steps: Vec<Option<(f64, f64)>> = (0..m).map(|p| limit(p, 0.0)).collect();
                let best_step = steps
                    .iter()
                    .flatten()
                    .map(|&(t, _)| t)
                    .fold(f64::INFINITY, f64::min);
                for (p, s) in steps.iter().enumerate() {
                    if let Some((t, target)) = *s {
                        if t <= best_step + 1e-12
                            && leave.is_none_or(|(bp, _, _)| self.head[p] < self.head[bp])
                        {
                            leave = Some((p, t, target));
                        }
                    }
                }
            } else {
                let mut theta_max = f64::INFINITY;
                for p in 0..m {
                    if let Some((t, _)) = limit(p, HARRIS_TOL) {
                        theta_max = theta_max.min(t);
                    }
                }
                if theta_max.is_finite() {
                    let mut best_abs = 0.0;
                    for p in 0..m {
                        if let Some((t, target)) = limit(p, 0.0) {
                            if t <= theta_max && alpha[p].abs() > best_abs {
                                best_abs = alpha[p].abs();
                                leave = Some((p, t, target));
                            }
                        }
                    }
                }
            }

            let step = leave.map_or(f64::INFINITY, |(_, t, _)| t);
            if flip_range.is_finite() && flip_range <= step {
                // Bound flip of the entering variable.
                let delta = dir * flip_range;
                for (p, &j) in self.head.iter().enumerate() {
                    self.x[j] -= delta * alpha[p];
                }
                self.state[q] = if dir > 0.0 {
                    VarState::Upper
                } else {
                    VarState::Lower
                };
                self.x[q] = self.nonbasic_value(q);
                self.iterations += 1;
                degenerate_run = 0;
                continue;
            }
            let Some((p, step, target)) = leave else {
                return if phase1 {
                    LpStatus::NumericalFailure
                } else {
                    LpStatus::Unbounded
                };
            };
            let step = step.max(0.0);

            for (pp, &j) in self.head.iter().enumerate() {
                self.x[j] -= dir * step * alpha[pp];
            }
            self.x[q] += dir * step;
            let out = self.head[p];
            self.x[out] = target;
            self.state[out] = if target == self.lower[out] {
                VarState::Lower
            } else {
                VarState::Upper
            };
            self.head[p] = q;
            self.state[q] = VarState::Basic;
            self.lu.update(p, &alpha);
            since_refactor += 1;
            self.iterations += 1;
            final_checks = 0;
            if step < 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::{Model, Sense};

    fn solve_model(model: &Model) -> LpOutcome {
        let data = LpData::from_model(model);
        solve(&data, &data.lower, &data.upper, None, &SimplexOptions::default())
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, false);
        let y = m.add_var("y", 0.0, f64::INFINITY, false);
        m.set_objective(x, -3.0);
        m.set_objective(y, -5.0);
        m.add_row("a", vec![(x, 1.0)], Sense::Le, 4.0);
        m.add_row("b", vec![(y, 2.0)], Sense::Le, 12.0);
        m.add_row("c", vec![(x, 3.0), (y, 2.0)], Sense::Le, 18.0);
        let out = solve_model(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 36.0).abs() < 1e-9);
        assert!((out.x[0] - 2.0).abs() < 1e-9 && (out.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one_and_equalities() {
        // min x + y s.t. x + y >= 2, x - y = 1, x,y >= 0 -> x=1.5, y=0.5
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, false);
        let y = m.add_var("y", 0.0, f64::INFINITY, false);
        m.set_objective(x, 1.0);
        m.set_objective(y, 1.0);
        m.add_row("a", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 2.0);
        m.add_row("b", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0);
        let out = solve_model(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - 2.0).abs() < 1e-9);
        assert!(m.max_violation(&out.x) < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 1.0, false);
        m.add_row("a", vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve_model(&m).status, LpStatus::Infeasible);

        let mut m = Model::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, false);
        let y = m.add_var("y", f64::NEG_INFINITY, f64::INFINITY, false);
        m.set_objective(y, -1.0);
        m.add_row("a", vec![(x, 1.0), (y, -1.0)], Sense::Ge, 0.0);
        assert_eq!(solve_model(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn bounded_variables_flip() {
        // max x + y with x,y in [0, 3] and x + y <= 5 -> 5
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, 3.0, false);
        let y = m.add_var("y", 0.0, 3.0, false);
        m.set_objective(x, -1.0);
        m.set_objective(y, -1.0);
        m.add_row("a", vec![(x, 1.0), (y, 1.0)], Sense::Le, 5.0);
        let out = solve_model(&m);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 5.0).abs() < 1e-9);
    }

    #[test]
    fn warm_start_after_bound_change() {
        let mut m = Model::new();
        let x = m.add_var("x", 0.0, f64::INFINITY, false);
        let y = m.add_var("y", 0.0, f64::INFINITY, false);
        m.set_objective(x, -1.0);
        m.set_objective(y, -1.0);
        m.add_row("a", vec![(x, 2.0), (y, 1.0)], Sense::Le, 4.0);
        m.add_row("b", vec![(x, 1.0), (y, 2.0)], Sense::Le, 4.0);
        let data = LpData::from_model(&m);
        let opts = SimplexOptions::default();
        let first = solve(&data, &data.lower, &data.upper, None, &opts);
        assert!((first.objective + 8.0 / 3.0).abs() < 1e-9);
        let upper = vec![1.0, f64::INFINITY];
        let second = solve(&data, &data.lower, &upper, Some(&first.basis), &opts);
        assert_eq!(second.status, LpStatus::Optimal);
        assert!((second.objective + 2.5).abs() < 1e-9);
    }
}
