// SPDX-License-Identifier: Apache-2.0

//! Integer program for phase-depth assignment.
//!
//! Every dag node `i` gets a depth `D_i >= 1`. For each edge `(i, j)` with
//! `delta = D_j - D_i`:
//!
//! ```text
//! delta >= 1
//! delta - W * C_ij <= W          W = N - 1 when hold-safe, N otherwise
//! ```
//!
//! so `C_ij` path-balancing DFFs keep every hop within one clock window.
//! Primary inputs sit at depth 1, primary outputs share a free depth
//! `D_outputs`, and each register's PSO sits exactly `d_loop` above its PSI.
//! The fanout-aware variant adds `C_ij <= C_i` and minimizes `sum C_i`.

use std::fmt;

use thiserror::Error;

use crate::dag::{CircuitDag, NodeKind};
use crate::solver::{IntegralDepths, Model, Sense, VarId};

/// Clocking variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Single-phase full path balancing.
    Fpb,
    Baseline,
    Fanout,
    HoldSafe,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Fpb, Mode::Baseline, Mode::Fanout, Mode::HoldSafe];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Fpb => "fpb",
            Mode::Baseline => "baseline",
            Mode::Fanout => "fanout",
            Mode::HoldSafe => "holdsafe",
        }
    }

    pub fn hold_safe(self) -> bool {
        self == Mode::HoldSafe
    }

    pub fn fanout_aware(self) -> bool {
        self == Mode::Fanout
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected fpb, baseline, fanout or holdsafe)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClockingParams {
    pub n_phases: u32,
    /// Register loop span in phases. `None` picks the smallest feasible
    /// multiple of `n_phases`.
    pub d_loop: Option<u32>,
    pub hold_safe: bool,
    pub fanout_aware: bool,
}

impl ClockingParams {
    pub fn new(mode: Mode, n_phases: u32, d_loop: Option<u32>) -> Self {
        ClockingParams {
            n_phases,
            d_loop,
            hold_safe: mode.hold_safe(),
            fanout_aware: mode.fanout_aware(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulationError {
    #[error("number of phases must be at least 1")]
    NoPhases,
    #[error("hold-safe clocking needs N >= 2 phases (got N = {0})")]
    HoldSafeNeedsTwoPhases(u32),
    #[error("fpb mode is single-phase; N = {0} is not allowed")]
    FpbIsSinglePhase(u32),
    #[error("d_loop = {d_loop} must be a multiple of N = {n_phases}")]
    DloopNotMultiple { d_loop: u32, n_phases: u32 },
    #[error("d_loop = {d_loop} is shorter than the longest register loop; the smallest feasible value for N = {n_phases} is {min}")]
    DloopTooShort { d_loop: u32, n_phases: u32, min: u32 },
    #[error("combinational circuit has no primary outputs")]
    NoOutputs,
}

/// Formulated clocking problem plus the structure needed to check integral
/// depth assignments against it.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    n_phases: u32,
    d_loop: u32,
    hold_safe: bool,
    fanout_aware: bool,
    model: Model,
    depth_vars: Vec<VarId>,
    outputs_var: VarId,
    edge_cost_vars: Vec<VarId>,
    driver_cost_vars: Vec<Option<VarId>>,
    edges: Vec<(usize, usize)>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    register_pairs: Vec<(usize, usize)>,
}

impl ProblemInstance {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn n_phases(&self) -> u32 {
        self.n_phases
    }

    pub fn d_loop(&self) -> u32 {
        self.d_loop
    }

    pub fn threads(&self) -> u32 {
        self.d_loop / self.n_phases
    }

    pub fn hold_safe(&self) -> bool {
        self.hold_safe
    }

    pub fn fanout_aware(&self) -> bool {
        self.fanout_aware
    }

    /// Largest depth gap a single hop may span.
    pub fn window(&self) -> i64 {
        window(self.n_phases, self.hold_safe)
    }

    /// `D_i` variable per dag node, indexed by node id.
    pub fn depth_vars(&self) -> &[VarId] {
        &self.depth_vars
    }

    pub fn outputs_var(&self) -> VarId {
        self.outputs_var
    }

    /// `C_ij` variable per dag edge, indexed by edge id.
    pub fn edge_cost_vars(&self) -> &[VarId] {
        &self.edge_cost_vars
    }

    /// `C_i` variable per dag node; `None` for nodes without fanout or when
    /// the instance is not fanout-aware.
    pub fn driver_cost_vars(&self) -> &[Option<VarId>] {
        &self.driver_cost_vars
    }

    pub fn num_constraints(&self) -> usize {
        self.model.num_rows()
    }

    /// Checks the depth constraints exactly: positive gaps on every edge,
    /// pinned inputs, equal outputs and exact register spans. The window
    /// constraints always hold once costs are recomputed from the depths.
    pub fn check_depths(&self, d: &IntegralDepths) -> Result<(), String> {
        if d.depth.len() != self.depth_vars.len() {
            return Err(format!(
                "expected {} depths, got {}",
                self.depth_vars.len(),
                d.depth.len()
            ));
        }
        if let Some((i, &v)) = d.depth.iter().enumerate().find(|(_, &v)| v < 1) {
            return Err(format!("D of node {i} is {v} < 1"));
        }
        for &(i, j) in &self.edges {
            if d.depth[j] - d.depth[i] < 1 {
                return Err(format!(
                    "edge {i}->{j}: D_j - D_i = {} < 1",
                    d.depth[j] - d.depth[i]
                ));
            }
        }
        for &i in &self.inputs {
            if d.depth[i] != 1 {
                return Err(format!("input node {i} has D = {} != 1", d.depth[i]));
            }
        }
        for &o in &self.outputs {
            if d.depth[o] != d.outputs {
                return Err(format!(
                    "output node {o} has D = {} != D_outputs = {}",
                    d.depth[o], d.outputs
                ));
            }
        }
        for &(pso, psi) in &self.register_pairs {
            let span = d.depth[pso] - d.depth[psi];
            if span != self.d_loop as i64 {
                return Err(format!(
                    "register {psi}/{pso}: D_pso - D_psi = {span} != d_loop = {}",
                    self.d_loop
                ));
            }
        }
        Ok(())
    }

    /// Complete variable vector for integral depths, with every cost at its
    /// smallest feasible value. Suitable as an ILP warm start.
    pub fn integral_point(&self, d: &IntegralDepths) -> Vec<f64> {
        let w = self.window();
        let mut x = vec![0.0; self.model.num_vars()];
        for (&v, &depth) in self.depth_vars.iter().zip(&d.depth) {
            x[v.0] = depth as f64;
        }
        x[self.outputs_var.0] = d.outputs as f64;
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            let c = edge_cost(d.depth[j] - d.depth[i], w);
            x[self.edge_cost_vars[e].0] = c as f64;
            if let Some(ci) = self.driver_cost_vars[i] {
                x[ci.0] = x[ci.0].max(c as f64);
            }
        }
        x
    }

    /// Depths of an integral solution vector.
    pub fn depths_of(&self, values: &[f64]) -> IntegralDepths {
        IntegralDepths {
            depth: self
                .depth_vars
                .iter()
                .map(|v| values[v.0].round() as i64)
                .collect(),
            outputs: values[self.outputs_var.0].round() as i64,
        }
    }
}

pub fn window(n_phases: u32, hold_safe: bool) -> i64 {
    if hold_safe {
        n_phases as i64 - 1
    } else {
        n_phases as i64
    }
}

/// Fewest DFFs splitting a gap of `delta` into hops of at most `w`.
pub fn edge_cost(delta: i64, w: i64) -> i64 {
    debug_assert!(delta >= 1 && w >= 1);
    (delta - 1) / w
}

/// As-soon-as-possible depths for a given register span, or `None` when
/// some register loop is longer than `d_loop`.
///
/// Longest paths over the difference constraints; PSIs are lifted to
/// `D_pso - d_loop` and the pass repeats. A simple path crosses each
/// register back edge at most once, so more than `registers + 2` passes
/// means a positive cycle.
pub fn asap_depths(dag: &CircuitDag, d_loop: u32) -> Option<IntegralDepths> {
    let n = dag.num_nodes();
    let span = d_loop as i64;
    let mut depth = vec![1i64; n];
    let mut psi_floor = vec![1i64; n];
    let mut pso_of_psi = vec![usize::MAX; n];
    for &(pso, psi) in &dag.register_pairs {
        pso_of_psi[psi] = pso;
    }
    let max_passes = dag.register_pairs.len() + 2;
    for _ in 0..max_passes {
        for &v in dag.topological_order() {
            let mut d = match dag.nodes[v].kind {
                NodeKind::Pi => 1,
                NodeKind::Psi => psi_floor[v],
                _ => 1,
            };
            for e in dag.in_edges(v) {
                d = d.max(depth[e.src] + 1);
            }
            depth[v] = d;
        }
        for &(pso, psi) in &dag.register_pairs {
            depth[pso] = depth[pso].max(depth[psi] + span);
        }
        let mut changed = false;
        for &(pso, psi) in &dag.register_pairs {
            let need = depth[pso] - span;
            if need > psi_floor[psi] {
                psi_floor[psi] = need;
                changed = true;
            }
        }
        if !changed {
            let outputs = dag
                .primary_outputs()
                .map(|o| depth[o])
                .max()
                .unwrap_or(1);
            for o in dag.primary_outputs() {
                depth[o] = outputs;
            }
            let ok = dag
                .register_pairs
                .iter()
                .all(|&(pso, psi)| depth[pso] - depth[psi] == span);
            return ok.then_some(IntegralDepths { depth, outputs });
        }
    }
    None
}

/// Smallest multiple of `n_phases` that every register loop fits in.
pub fn min_feasible_dloop(dag: &CircuitDag, n_phases: u32) -> u32 {
    let n = n_phases.max(1);
    if dag.register_pairs.is_empty() {
        return n;
    }
    let feasible = |k: u32| asap_depths(dag, k * n).is_some();
    // A loop never spans more phases than there are nodes.
    let mut hi = (dag.num_nodes() as u32).div_ceil(n).max(1);
    while !feasible(hi) {
        hi *= 2;
    }
    let mut lo = 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo * n
}

fn resolve_dloop(dag: &CircuitDag, params: &ClockingParams) -> Result<u32, FormulationError> {
    let n = params.n_phases;
    match params.d_loop {
        None => Ok(min_feasible_dloop(dag, n)),
        Some(d) if d == 0 || d % n != 0 => Err(FormulationError::DloopNotMultiple {
            d_loop: d,
            n_phases: n,
        }),
        Some(d) => {
            let min = min_feasible_dloop(dag, n);
            if d < min {
                Err(FormulationError::DloopTooShort {
                    d_loop: d,
                    n_phases: n,
                    min,
                })
            } else {
                Ok(d)
            }
        }
    }
}

/// Builds the clocking problem for `dag`.
pub fn formulate(dag: &CircuitDag, params: &ClockingParams) -> Result<ProblemInstance, FormulationError> {
    let n = params.n_phases;
    if n == 0 {
        return Err(FormulationError::NoPhases);
    }
    if params.hold_safe && n < 2 {
        return Err(FormulationError::HoldSafeNeedsTwoPhases(n));
    }
    if dag.register_pairs.is_empty() && dag.primary_outputs().next().is_none() {
        return Err(FormulationError::NoOutputs);
    }
    let d_loop = resolve_dloop(dag, params)?;
    let w = window(n, params.hold_safe) as f64;

    let mut model = Model::new();
    let depth_vars: Vec<VarId> = dag
        .nodes
        .iter()
        .map(|node| {
            let v = model.add_var(format!("D_{}", node.label), 1.0, f64::INFINITY, true);
            model.set_priority(v, 1);
            v
        })
        .collect();
    let outputs_var = model.add_var("D_outputs", 1.0, f64::INFINITY, true);
    model.set_priority(outputs_var, 1);

    let edge_cost_vars: Vec<VarId> = dag
        .edges
        .iter()
        .map(|e| {
            let name = format!("C_{}~{}", dag.nodes[e.src].label, dag.nodes[e.dst].label);
            let v = model.add_var(&name, 0.0, f64::INFINITY, true);
            model.set_priority(v, 0);
            v
        })
        .collect();
    let driver_cost_vars: Vec<Option<VarId>> = dag
        .nodes
        .iter()
        .map(|node| {
            (params.fanout_aware && dag.out_degree(node.id) > 0).then(|| {
                let v = model.add_var(format!("C_{}", node.label), 0.0, f64::INFINITY, true);
                model.set_priority(v, 0);
                v
            })
        })
        .collect();

    for (k, e) in dag.edges.iter().enumerate() {
        let (di, dj, c) = (depth_vars[e.src], depth_vars[e.dst], edge_cost_vars[k]);
        model.add_row(format!("gap{k}"), vec![(dj, 1.0), (di, -1.0)], Sense::Ge, 1.0);
        model.add_row(
            format!("win{k}"),
            vec![(dj, 1.0), (di, -1.0), (c, -w)],
            Sense::Le,
            w,
        );
    }
    let inputs: Vec<usize> = dag.primary_inputs().collect();
    for &i in &inputs {
        model.add_row(format!("pi{i}"), vec![(depth_vars[i], 1.0)], Sense::Eq, 1.0);
    }
    let outputs: Vec<usize> = dag.primary_outputs().collect();
    for &o in &outputs {
        model.add_row(
            format!("po{o}"),
            vec![(depth_vars[o], 1.0), (outputs_var, -1.0)],
            Sense::Eq,
            0.0,
        );
    }
    for (k, &(pso, psi)) in dag.register_pairs.iter().enumerate() {
        model.add_row(
            format!("loop{k}"),
            vec![(depth_vars[pso], 1.0), (depth_vars[psi], -1.0)],
            Sense::Eq,
            d_loop as f64,
        );
    }
    if params.fanout_aware {
        for (k, e) in dag.edges.iter().enumerate() {
            let ci = driver_cost_vars[e.src].expect("driver with an out edge has C_i");
            model.add_row(
                format!("share{k}"),
                vec![(edge_cost_vars[k], 1.0), (ci, -1.0)],
                Sense::Le,
                0.0,
            );
        }
        for v in driver_cost_vars.iter().flatten() {
            model.set_objective(*v, 1.0);
        }
    } else {
        for v in &edge_cost_vars {
            model.set_objective(*v, 1.0);
        }
    }

    Ok(ProblemInstance {
        n_phases: n,
        d_loop,
        hold_safe: params.hold_safe,
        fanout_aware: params.fanout_aware,
        model,
        depth_vars,
        outputs_var,
        edge_cost_vars,
        driver_cost_vars,
        edges: dag.edges.iter().map(|e| (e.src, e.dst)).collect(),
        inputs,
        outputs,
        register_pairs: dag.register_pairs.clone(),
    })
}

/// Single-phase full path balancing: the `N = 1` baseline instance.
pub fn formulate_fpb(dag: &CircuitDag, d_loop: Option<u32>) -> Result<ProblemInstance, FormulationError> {
    formulate(dag, &ClockingParams::new(Mode::Fpb, 1, d_loop))
}

/// Instance for `mode` at `n_phases`, rejecting multi-phase FPB.
pub fn formulate_mode(
    dag: &CircuitDag,
    mode: Mode,
    n_phases: u32,
    d_loop: Option<u32>,
) -> Result<ProblemInstance, FormulationError> {
    if mode == Mode::Fpb && n_phases != 1 {
        return Err(FormulationError::FpbIsSinglePhase(n_phases));
    }
    formulate(dag, &ClockingParams::new(mode, n_phases, d_loop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;
    use crate::dag::build_dag;

    fn dag(text: &str) -> CircuitDag {
        build_dag(&parse_bench(text).unwrap()).unwrap()
    }

    fn params(n: u32, hold_safe: bool, fanout_aware: bool) -> ClockingParams {
        ClockingParams {
            n_phases: n,
            d_loop: None,
            hold_safe,
            fanout_aware,
        }
    }

    #[test]
    fn constraint_count() {
        let d = dag("INPUT(a)\nINPUT(b)\nOUTPUT(c)\nOUTPUT(q)\nc = AND(a, b)\nq = DFF(c)");
        let base = formulate(&d, &params(2, false, false)).unwrap();
        let e = d.edges.len();
        assert_eq!(base.num_constraints(), 2 * e + 2 + 2 + 1);
        let fan = formulate(&d, &params(2, false, true)).unwrap();
        assert_eq!(fan.num_constraints(), 3 * e + 2 + 2 + 1);
    }

    #[test]
    fn parameter_errors() {
        let d = dag("INPUT(a)\nOUTPUT(b)\nb = NOT(a)");
        assert_eq!(
            formulate(&d, &params(1, true, false)).unwrap_err(),
            FormulationError::HoldSafeNeedsTwoPhases(1)
        );
        let p = ClockingParams {
            d_loop: Some(5),
            ..params(2, false, false)
        };
        let err = formulate(&d, &p).unwrap_err();
        assert!(err.to_string().contains("must be a multiple of N"));
        assert_eq!(formulate(&d, &params(0, false, false)).unwrap_err(), FormulationError::NoPhases);
        let empty = dag("INPUT(a)\nb = NOT(a)");
        assert_eq!(formulate(&empty, &params(2, false, false)).unwrap_err(), FormulationError::NoOutputs);
        assert_eq!(
            formulate_mode(&d, Mode::Fpb, 2, None).unwrap_err(),
            FormulationError::FpbIsSinglePhase(2)
        );
    }

    #[test]
    fn loop_span_defaults_to_smallest_feasible_multiple() {
        // q -> n -> m -> q: the loop needs a span of 3 phases.
        let d = dag("INPUT(a)\nOUTPUT(q)\nq = DFF(m)\nn = XOR(a, q)\nm = NOT(n)");
        assert_eq!(min_feasible_dloop(&d, 1), 3);
        assert_eq!(min_feasible_dloop(&d, 2), 4);
        assert_eq!(min_feasible_dloop(&d, 3), 3);
        assert_eq!(min_feasible_dloop(&d, 4), 4);
        let inst = formulate(&d, &params(2, false, false)).unwrap();
        assert_eq!(inst.d_loop(), 4);
        assert_eq!(inst.threads(), 2);
        let short = ClockingParams {
            d_loop: Some(2),
            ..params(2, false, false)
        };
        assert!(matches!(
            formulate(&d, &short),
            Err(FormulationError::DloopTooShort { min: 4, .. })
        ));
    }

    #[test]
    fn asap_depths_are_feasible() {
        let d = dag("INPUT(a)\nOUTPUT(q)\nOUTPUT(m)\nq = DFF(m)\nn = XOR(a, q)\nm = NOT(n)");
        let inst = formulate(&d, &params(3, false, false)).unwrap();
        let asap = asap_depths(&d, inst.d_loop()).unwrap();
        inst.check_depths(&asap).unwrap();
        let x = inst.integral_point(&asap);
        assert!(inst.model().max_violation(&x) < 1e-9);
        assert!(asap_depths(&d, 2).is_none());
    }

    #[test]
    fn edge_cost_examples() {
        assert_eq!(edge_cost(2, 2), 0);
        assert_eq!(edge_cost(7, 3), 2);
        assert_eq!(edge_cost(3, 2), 1);
        assert_eq!(edge_cost(5, 2), 2);
        assert_eq!(edge_cost(1, 1), 0);
    }

    #[test]
    fn variable_names() {
        let d = dag("INPUT(a)\nOUTPUT(b)\nb = NOT(a)");
        let inst = formulate(&d, &params(2, false, true)).unwrap();
        let names: Vec<&str> = inst.model().vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(
            names,
            ["D_a", "D_b", "D_b~po0", "D_outputs", "C_a~b", "C_b~b~po0", "C_a", "C_b"]
        );
    }
}
