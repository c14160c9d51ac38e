// SPDX-License-Identifier: Apache-2.0

//! Depth-first branch-and-bound with best-bound backtracking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use super::model::Model;
use super::simplex::{self, Basis, LpData, LpStatus, SimplexOptions};
use super::{IlpOptions, SolveStats, SolveStatus, Solution, SolverError};

const INT_TOL: f64 = 1e-6;

struct Node {
    bound: f64,
    depth: usize,
    /// Bound changes relative to the root: (var, lower, upper).
    changes: Vec<(usize, f64, f64)>,
    basis: Rc<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap on "better": smaller bound first, then deeper node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
    }
}

struct Search<'a> {
    model: &'a Model,
    data: LpData,
    integral_objective: bool,
    incumbent: Option<(f64, Vec<f64>)>,
    iterations: usize,
    branch_nodes: usize,
}

impl Search<'_> {
    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            None => false,
            Some((best, _)) => {
                if self.integral_objective {
                    (bound - INT_TOL).ceil() >= *best - INT_TOL
                } else {
                    bound >= *best - 1e-9 * best.abs().max(1.0)
                }
            }
        }
    }

    fn branching_variable(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(u8, f64, usize)> = None;
        for (j, v) in self.model.vars.iter().enumerate() {
            if !v.integer {
                continue;
            }
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= INT_TOL {
                continue;
            }
            let better = match best {
                None => true,
                Some((prio, d, _)) => v.priority < prio || (v.priority == prio && dist > d + 1e-12),
            };
            if better {
                best = Some((v.priority, dist, j));
            }
        }
        best.map(|(_, _, j)| j)
    }

    fn offer(&mut self, x: &[f64]) {
        let mut values = x.to_vec();
        for (j, v) in self.model.vars.iter().enumerate() {
            if v.integer {
                values[j] = values[j].round();
            }
        }
        if self.model.max_violation(&values) > 1e-6 {
            return;
        }
        let obj = self.model.objective_value(&values);
        if self.incumbent.as_ref().is_none_or(|(best, _)| obj < *best - 1e-9) {
            self.incumbent = Some((obj, values));
        }
    }
}

pub(super) fn branch_and_bound(model: &Model, opts: &IlpOptions) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let deadline = start + opts.time_limit;
    let data = LpData::from_model(model);
    let root_lower = data.lower.clone();
    let root_upper = data.upper.clone();
    let lp_opts = SimplexOptions {
        deadline: Some(deadline),
        ..SimplexOptions::default()
    };

    let mut search = Search {
        model,
        integral_objective: model.objective_is_integral(),
        data,
        incumbent: None,
        iterations: 0,
        branch_nodes: 0,
    };

    if let Some(warm) = &opts.warm_start {
        if warm.len() != model.num_vars() {
            return Err(SolverError::InvalidWarmStart(format!(
                "expected {} values, got {}",
                model.num_vars(),
                warm.len()
            )));
        }
        let integral = model
            .vars
            .iter()
            .zip(warm)
            .all(|(v, x)| !v.integer || (x - x.round()).abs() <= INT_TOL);
        if !integral || model.max_violation(warm) > 1e-6 {
            return Err(SolverError::InvalidWarmStart(
                "warm start is not an integral feasible point".into(),
            ));
        }
        search.incumbent = Some((model.objective_value(warm), warm.clone()));
    }

    let root = simplex::solve(&search.data, &root_lower, &root_upper, None, &lp_opts);
    search.iterations += root.iterations;
    let finish = |search: Search, status: SolveStatus, bound: f64| -> Solution {
        let stats = SolveStats {
            iterations: search.iterations,
            branch_nodes: search.branch_nodes,
            wall_time: start.elapsed(),
        };
        match search.incumbent {
            Some((obj, values)) => Solution {
                status,
                values,
                objective: obj,
                bound,
                stats,
            },
            None => Solution {
                status: if status == SolveStatus::Optimal {
                    SolveStatus::Infeasible
                } else {
                    status
                },
                values: Vec::new(),
                objective: f64::INFINITY,
                bound,
                stats,
            },
        }
    };
    match root.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(finish(search, SolveStatus::Infeasible, f64::INFINITY)),
        LpStatus::Unbounded => return Err(SolverError::Unbounded),
        LpStatus::TimeLimit | LpStatus::IterationLimit => {
            let status = if search.incumbent.is_some() {
                SolveStatus::Incumbent
            } else {
                SolveStatus::NoSolution
            };
            return Ok(finish(search, status, f64::NEG_INFINITY));
        }
        LpStatus::NumericalFailure => {
            return Err(SolverError::Numerical("root relaxation failed".into()))
        }
    }

    let mut open: BinaryHeap<Node> = BinaryHeap::new();
    let mut dive: Option<(Node, Option<simplex::LpOutcome>)> = Some((
        Node {
            bound: root.objective,
            depth: 0,
            changes: Vec::new(),
            basis: Rc::new(root.basis.clone()),
        },
        Some(root),
    ));
    let mut limit_hit = false;

    loop {
        let (node, solved) = match dive.take() {
            Some(x) => x,
            None => match open.pop() {
                Some(n) => (n, None),
                None => break,
            },
        };
        if search.prunable(node.bound) {
            continue;
        }
        if Instant::now() >= deadline
            || opts.node_limit.is_some_and(|l| search.branch_nodes >= l)
        {
            open.push(node);
            limit_hit = true;
            break;
        }

        let outcome = match solved {
            Some(o) => o,
            None => {
                let mut lower = root_lower.clone();
                let mut upper = root_upper.clone();
                for &(j, lo, hi) in &node.changes {
                    lower[j] = lo;
                    upper[j] = hi;
                }
                search.branch_nodes += 1;
                let o = simplex::solve(&search.data, &lower, &upper, Some(&node.basis), &lp_opts);
                search.iterations += o.iterations;
                o
            }
        };
        match outcome.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::TimeLimit | LpStatus::IterationLimit => {
                open.push(node);
                limit_hit = true;
                break;
            }
            LpStatus::Unbounded => return Err(SolverError::Unbounded),
            LpStatus::NumericalFailure => {
                return Err(SolverError::Numerical("node relaxation failed".into()))
            }
        }
        let bound = outcome.objective;
        if search.prunable(bound) {
            continue;
        }
        let Some(j) = search.branching_variable(&outcome.x) else {
            search.offer(&outcome.x);
            continue;
        };

        let value = outcome.x[j];
        let (lo, hi) = node
            .changes
            .iter()
            .rev()
            .find(|c| c.0 == j)
            .map(|&(_, lo, hi)| (lo, hi))
            .unwrap_or((root_lower[j], root_upper[j]));
        let basis = Rc::new(outcome.basis);
        let mut up = node.changes.clone();
        up.push((j, value.ceil(), hi));
        let mut down = node.changes;
        down.push((j, lo, value.floor()));
        open.push(Node {
            bound,
            depth: node.depth + 1,
            changes: down,
            basis: Rc::clone(&basis),
        });
        dive = Some((
            Node {
                bound,
                depth: node.depth + 1,
                changes: up,
                basis,
            },
            None,
        ));
    }

    let bound = if limit_hit {
        let pending = open.iter().map(|n| n.bound);
        let best = pending.fold(f64::INFINITY, f64::min);
        match &search.incumbent {
            Some((obj, _)) => best.min(*obj),
            None => best,
        }
    } else {
        search
            .incumbent
            .as_ref()
            .map_or(f64::INFINITY, |(obj, _)| *obj)
    };
    let status = match (limit_hit, search.incumbent.is_some()) {
        (false, _) => SolveStatus::Optimal,
        (true, true) => SolveStatus::Incumbent,
        (true, false) => SolveStatus::NoSolution,
    };
    Ok(finish(search, status, bound))
}
