// SPDX-License-Identifier: Apache-2.0

//! LP and ILP solving for clocking instances.
//!
//! [`solve_lp`] runs the bounded primal simplex on the relaxation,
//! [`solve_ilp`] runs branch-and-bound on top of it, and
//! [`round_solution`] turns a fractional depth assignment into an integral one.

mod branch;
pub mod lp_format;
pub mod lu;
pub mod model;
pub mod simplex;

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

pub use lp_format::export_lp_format;
pub use model::{Constraint, Model, RowId, Sense, VarId, Variable};

use crate::formulation::ProblemInstance;
use simplex::{LpData, LpStatus, SimplexOptions};

/// Default ILP time limit (50 minutes).
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(3000);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    /// Proven optimal.
    Optimal,
    /// A limit was hit; `values` holds the best feasible point found.
    Incumbent,
    Infeasible,
    /// A limit was hit before any feasible point was found.
    NoSolution,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub branch_nodes: usize,
    #[serde(serialize_with = "serialize_millis")]
    pub wall_time: Duration,
}

fn serialize_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: SolveStatus,
    /// One value per model variable; empty when there is no solution.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound on the objective.
    pub bound: f64,
    pub stats: SolveStats,
}

impl Solution {
    pub fn has_values(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Incumbent)
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("problem is unbounded")]
    Unbounded,
    #[error("LP solve stopped early: {0}")]
    Limit(&'static str),
    #[error("invalid warm start: {0}")]
    InvalidWarmStart(String),
    #[error("relaxation of a generated clocking instance is infeasible (formulation bug)")]
    InfeasibleInstance,
    #[error("rounded assignment violates {0}")]
    RoundingViolation(String),
}

#[derive(Clone, Debug)]
pub struct IlpOptions {
    pub time_limit: Duration,
    /// Deterministic cap on explored branch nodes.
    pub node_limit: Option<usize>,
    /// Integral feasible point installed as the initial incumbent.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for IlpOptions {
    fn default() -> Self {
        IlpOptions {
            time_limit: DEFAULT_TIME_LIMIT,
            node_limit: None,
            warm_start: None,
        }
    }
}

/// Solves the linear relaxation of `model`.
pub fn solve_model_lp(model: &Model) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let data = LpData::from_model(model);
    let out = simplex::solve(&data, &data.lower, &data.upper, None, &SimplexOptions::default());
    let stats = SolveStats {
        iterations: out.iterations,
        branch_nodes: 0,
        wall_time: start.elapsed(),
    };
    match out.status {
        LpStatus::Optimal => Ok(Solution {
            status: SolveStatus::Optimal,
            objective: out.objective,
            bound: out.objective,
            values: out.x,
            stats,
        }),
        LpStatus::Infeasible => Ok(Solution {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            stats,
        }),
        LpStatus::Unbounded => Err(SolverError::Unbounded),
        LpStatus::IterationLimit => Err(SolverError::Limit("iteration limit")),
        LpStatus::TimeLimit => Err(SolverError::Limit("time limit")),
        LpStatus::NumericalFailure => Err(SolverError::Numerical("simplex failed".into())),
    }
}

/// Solves `model` with integrality enforced by branch-and-bound.
pub fn solve_model_ilp(model: &Model, opts: &IlpOptions) -> Result<Solution, SolverError> {
    branch::branch_and_bound(model, opts)
}

/// LP relaxation of a clocking instance. Infeasibility is reported as an
/// error because generated instances always admit a longest-path solution.
pub fn solve_lp(inst: &ProblemInstance) -> Result<Solution, SolverError> {
    let sol = solve_model_lp(inst.model())?;
    if sol.status == SolveStatus::Infeasible {
        return Err(SolverError::InfeasibleInstance);
    }
    Ok(sol)
}

pub fn solve_ilp(inst: &ProblemInstance, opts: &IlpOptions) -> Result<Solution, SolverError> {
    solve_model_ilp(inst.model(), opts)
}

/// Integral depth assignment derived from a fractional solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralDepths {
    /// Depth per dag node.
    pub depth: Vec<i64>,
    pub outputs: i64,
}

/// Rounds every depth variable up and checks all depth constraints in exact
/// integer arithmetic. Edge and driver costs are not kept; they are
/// recomputed from the depths downstream.
pub fn round_solution(inst: &ProblemInstance, lp: &Solution) -> Result<IntegralDepths, SolverError> {
    if !lp.has_values() {
        return Err(SolverError::Numerical("no solution values to round".into()));
    }
    let ceil = |x: f64| -> i64 {
        // Values within the feasibility tolerance of an integer snap to it.
        let r = x.round();
        if (x - r).abs() <= 1e-6 {
            r as i64
        } else {
            x.ceil() as i64
        }
    };
    let depth: Vec<i64> = inst.depth_vars().iter().map(|&v| ceil(lp.value(v))).collect();
    let outputs = ceil(lp.value(inst.outputs_var()));
    let rounded = IntegralDepths { depth, outputs };
    inst.check_depths(&rounded)
        .map_err(SolverError::RoundingViolation)?;
    Ok(rounded)
}
