// SPDX-License-Identifier: Apache-2.0

//! End-to-end flow: netlist to verified clocked design.

use std::time::Duration;

use thiserror::Error;

use crate::assignment::{
    check_clocking, count_inserted, extract_phases, insert_dffs, plan_insertion,
    recompute_edge_costs, AssignmentError, InsertionPlan, PhaseAssignment,
};
use crate::bench::{AnnotatedNetlist, BenchError, Netlist};
use crate::dag::{build_dag, CircuitDag, DagError};
use crate::formulation::{formulate_mode, FormulationError, Mode, ProblemInstance};
use crate::simulator::{verify, SimConfig, SimError, VerifyReport};
use crate::solver::{
    round_solution, solve_ilp, solve_lp, IlpOptions, IntegralDepths, Solution, SolveStatus,
    SolverError,
};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("parse error: {0}")]
    Parse(#[from] BenchError),
    #[error("graph error: {0}")]
    Dag(#[from] DagError),
    #[error("parameter error: {0}")]
    Formulation(#[from] FormulationError),
    #[error("solver error: {0}")]
    Solver(#[from] SolverError),
    #[error("assignment error: {0}")]
    Assignment(#[from] AssignmentError),
    #[error("simulation error: {0}")]
    Simulation(#[from] SimError),
    #[error("ILP found no solution within its limits")]
    NoSolution,
    #[error("io error: {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A netlist with its optimization graph.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub netlist: Netlist,
    pub dag: CircuitDag,
}

impl Circuit {
    pub fn new(netlist: Netlist) -> Result<Self, FlowError> {
        let dag = build_dag(&netlist)?;
        Ok(Circuit { netlist, dag })
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, FlowError> {
        let mut netlist = crate::bench::parse_bench(text)?;
        netlist.name = name.to_string();
        Self::new(netlist)
    }

    pub fn formulate(&self, mode: Mode, n_phases: u32, d_loop: Option<u32>) -> Result<ProblemInstance, FlowError> {
        Ok(formulate_mode(&self.dag, mode, n_phases, d_loop)?)
    }
}

/// Physical design derived from one integral depth assignment.
#[derive(Clone, Debug)]
pub struct Design {
    pub depths: IntegralDepths,
    pub phases: PhaseAssignment,
    pub edge_costs: Vec<i64>,
    pub plan: InsertionPlan,
    pub annotated: AnnotatedNetlist,
    /// Inserted path-balancing DFFs.
    pub dff_count: usize,
}

/// Rebuilds costs from depths, inserts DFFs and checks the clocking.
pub fn realize(circuit: &Circuit, inst: &ProblemInstance, depths: IntegralDepths) -> Result<Design, FlowError> {
    inst.check_depths(&depths).map_err(SolverError::RoundingViolation)?;
    let phases = extract_phases(&depths, inst.n_phases(), inst.hold_safe());
    let edge_costs = recompute_edge_costs(&depths, &circuit.dag, inst.n_phases(), inst.hold_safe())?;
    let plan = plan_insertion(&circuit.dag, &phases, &edge_costs, inst.fanout_aware())?;
    let annotated = insert_dffs(&circuit.netlist, &circuit.dag, &phases, &plan, inst.d_loop());
    check_clocking(&annotated)?;
    Ok(Design {
        dff_count: count_inserted(&plan),
        depths,
        phases,
        edge_costs,
        plan,
        annotated,
    })
}

/// LP relaxation followed by round-up.
#[derive(Clone, Debug)]
pub struct LpRun {
    pub solution: Solution,
    pub design: Design,
}

pub fn run_lp(circuit: &Circuit, inst: &ProblemInstance) -> Result<LpRun, FlowError> {
    let solution = solve_lp(inst)?;
    let depths = round_solution(inst, &solution)?;
    let design = realize(circuit, inst, depths)?;
    Ok(LpRun { solution, design })
}

#[derive(Clone, Debug)]
pub struct IlpRun {
    pub solution: Solution,
    /// `None` when the solver stopped without a feasible point.
    pub design: Option<Design>,
}

/// Branch-and-bound, warm-started from `incumbent` when given.
pub fn run_ilp(
    circuit: &Circuit,
    inst: &ProblemInstance,
    time_limit: Duration,
    node_limit: Option<usize>,
    incumbent: Option<&IntegralDepths>,
) -> Result<IlpRun, FlowError> {
    let opts = IlpOptions {
        time_limit,
        node_limit,
        warm_start: incumbent.map(|d| inst.integral_point(d)),
    };
    let solution = solve_ilp(inst, &opts)?;
    let design = match solution.status {
        SolveStatus::Optimal | SolveStatus::Incumbent => {
            Some(realize(circuit, inst, inst.depths_of(&solution.values))?)
        }
        SolveStatus::Infeasible => return Err(SolverError::InfeasibleInstance.into()),
        SolveStatus::NoSolution => None,
    };
    Ok(IlpRun { solution, design })
}

/// Simulates a design against the source netlist.
pub fn verify_design(circuit: &Circuit, design: &Design, cfg: &SimConfig) -> Result<VerifyReport, FlowError> {
    Ok(verify(&design.annotated, &circuit.netlist, cfg)?)
}
