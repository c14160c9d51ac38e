// SPDX-License-Identifier: Apache-2.0

//! From integral depths to a clocked netlist.
//!
//! A node at depth `D` sits in pipeline stage `ceil(D / N)` and fires on
//! phase `((D - 1) mod N) + 1`. Edges whose depth gap exceeds the window `W`
//! receive chains of DFFs spaced exactly `W` apart starting at the driver, so
//! the leftover gap (between 1 and `W`) sits next to the sink.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::bench::{AnnotatedNetlist, Cell, Element, Netlist, Op};
use crate::dag::{CircuitDag, NodeKind};
use crate::formulation::{edge_cost, window};
use crate::solver::IntegralDepths;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("edge {src} -> {dst} has depth gap {gap} < 1")]
    NonPositiveGap { src: String, dst: String, gap: i64 },
    #[error("wire {from} -> {to} spans {gap} phases, outside [1, {window}]")]
    GapOutsideWindow {
        from: String,
        to: String,
        gap: i64,
        window: i64,
    },
    #[error("wire {from} -> {to} connects two elements on phase {phase}")]
    SharedPhase { from: String, to: String, phase: u32 },
    #[error("{element} has phase {phase} but depth {depth} implies phase {expected}")]
    PhaseMismatch {
        element: String,
        phase: u32,
        depth: i64,
        expected: u32,
    },
    #[error("{0} has no clocking label")]
    Unlabeled(String),
}

pub fn stage_of(depth: i64, n_phases: u32) -> i64 {
    let n = n_phases as i64;
    (depth + n - 1).div_euclid(n)
}

pub fn phase_of(depth: i64, n_phases: u32) -> u32 {
    ((depth - 1).rem_euclid(n_phases as i64) + 1) as u32
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseAssignment {
    pub n_phases: u32,
    pub hold_safe: bool,
    /// Per dag node.
    pub depth: Vec<i64>,
    pub stage: Vec<i64>,
    pub phase: Vec<u32>,
    pub outputs_depth: i64,
    /// Clock cycles between injecting an input and observing its result.
    pub latency_cycles: i64,
}

impl PhaseAssignment {
    pub fn window(&self) -> i64 {
        window(self.n_phases, self.hold_safe)
    }
}

pub fn extract_phases(depths: &IntegralDepths, n_phases: u32, hold_safe: bool) -> PhaseAssignment {
    PhaseAssignment {
        n_phases,
        hold_safe,
        stage: depths.depth.iter().map(|&d| stage_of(d, n_phases)).collect(),
        phase: depths.depth.iter().map(|&d| phase_of(d, n_phases)).collect(),
        depth: depths.depth.clone(),
        outputs_depth: depths.outputs,
        latency_cycles: stage_of(depths.outputs, n_phases) - 1,
    }
}

/// Smallest DFF count per dag edge for the given depths.
pub fn recompute_edge_costs(
    depths: &IntegralDepths,
    dag: &CircuitDag,
    n_phases: u32,
    hold_safe: bool,
) -> Result<Vec<i64>, AssignmentError> {
    let w = window(n_phases, hold_safe);
    dag.edges
        .iter()
        .map(|e| {
            let gap = depths.depth[e.dst] - depths.depth[e.src];
            if gap < 1 {
                Err(AssignmentError::NonPositiveGap {
                    src: dag.nodes[e.src].label.clone(),
                    dst: dag.nodes[e.dst].label.clone(),
                    gap,
                })
            } else {
                Ok(edge_cost(gap, w))
            }
        })
        .collect()
}

/// DFFs inserted after one driver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub driver: usize,
    /// Depth of each DFF in chain order.
    pub depths: Vec<i64>,
    /// (edge id, chain position) per sink served by this chain; position 0
    /// would be the driver itself and never appears here.
    pub taps: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InsertionPlan {
    pub chains: Vec<Chain>,
}

/// Lays out DFF chains: one per edge, or one per driver shared by all of
/// its fanouts when `fanout_aware`.
pub fn plan_insertion(
    dag: &CircuitDag,
    phases: &PhaseAssignment,
    costs: &[i64],
    fanout_aware: bool,
) -> Result<InsertionPlan, AssignmentError> {
    let w = phases.window();
    let mut chains = Vec::new();
    for v in 0..dag.num_nodes() {
        let base = phases.depth[v];
        let make = |len: i64| (1..=len).map(|m| base + m * w).collect::<Vec<_>>();
        if fanout_aware {
            let taps: Vec<(usize, usize)> = dag
                .out_edge_ids(v)
                .iter()
                .filter(|&&e| costs[e] > 0)
                .map(|&e| (e, costs[e] as usize))
                .collect();
            let len = taps.iter().map(|t| t.1).max().unwrap_or(0);
            if len > 0 {
                chains.push(Chain {
                    driver: v,
                    depths: make(len as i64),
                    taps,
                });
            }
        } else {
            for &e in dag.out_edge_ids(v) {
                if costs[e] > 0 {
                    chains.push(Chain {
                        driver: v,
                        depths: make(costs[e]),
                        taps: vec![(e, costs[e] as usize)],
                    });
                }
            }
        }
    }
    let plan = InsertionPlan { chains };
    check_plan(dag, phases, costs, &plan)?;
    Ok(plan)
}

/// Every hop from a driver through its tapped DFFs to each sink must span
/// between 1 and `W` phases.
fn check_plan(
    dag: &CircuitDag,
    phases: &PhaseAssignment,
    costs: &[i64],
    plan: &InsertionPlan,
) -> Result<(), AssignmentError> {
    let w = phases.window();
    let mut tap_of: HashMap<usize, (&Chain, usize)> = HashMap::new();
    for chain in &plan.chains {
        for &(e, pos) in &chain.taps {
            tap_of.insert(e, (chain, pos));
        }
    }
    let outside = |from: String, to: String, gap: i64| AssignmentError::GapOutsideWindow {
        from,
        to,
        gap,
        window: w,
    };
    for (e, edge) in dag.edges.iter().enumerate() {
        let src = &dag.nodes[edge.src].label;
        let dst = &dag.nodes[edge.dst].label;
        let mut prev = phases.depth[edge.src];
        if let Some((chain, pos)) = tap_of.get(&e) {
            debug_assert_eq!(*pos as i64, costs[e]);
            for &d in &chain.depths[..*pos] {
                if !(1..=w).contains(&(d - prev)) {
                    return Err(outside(src.clone(), format!("{src} chain"), d - prev));
                }
                prev = d;
            }
        }
        let gap = phases.depth[edge.dst] - prev;
        if !(1..=w).contains(&gap) {
            return Err(outside(src.clone(), dst.clone(), gap));
        }
    }
    Ok(())
}

/// Number of DFFs the plan inserts.
pub fn count_inserted(plan: &InsertionPlan) -> usize {
    plan.chains.iter().map(|c| c.depths.len()).sum()
}

/// Builds the clocked netlist: original cells with fanins rewired through
/// inserted DFFs, registers merged back into single DFF cells, and a depth
/// and phase label on every input, cell and output port.
pub fn insert_dffs(
    netlist: &Netlist,
    dag: &CircuitDag,
    phases: &PhaseAssignment,
    plan: &InsertionPlan,
    d_loop: u32,
) -> AnnotatedNetlist {
    let n = phases.n_phases;
    let mut taken: HashSet<String> = netlist
        .inputs
        .iter()
        .chain(netlist.cells.iter().map(|c| &c.output))
        .cloned()
        .collect();

    // Name each inserted DFF `<driver>_pb<m>`, counting per driver.
    let mut next_index: HashMap<usize, usize> = HashMap::new();
    let mut chain_names: Vec<Vec<String>> = Vec::with_capacity(plan.chains.len());
    for chain in &plan.chains {
        let driver_net = &dag.nodes[chain.driver].net;
        let counter = next_index.entry(chain.driver).or_insert(0);
        let names = chain
            .depths
            .iter()
            .map(|_| {
                *counter += 1;
                let mut name = format!("{driver_net}_pb{}", *counter);
                while taken.contains(&name) {
                    name.push('_');
                }
                taken.insert(name.clone());
                name
            })
            .collect();
        chain_names.push(names);
    }

    // Net seen by the sink of each edge.
    let mut edge_net: HashMap<usize, &str> = HashMap::new();
    for (chain, names) in plan.chains.iter().zip(&chain_names) {
        for &(e, pos) in &chain.taps {
            edge_net.insert(e, &names[pos - 1]);
        }
    }
    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, edge) in dag.edges.iter().enumerate() {
        edge_of.insert((edge.src, edge.dst), e);
    }
    let node_of_net: HashMap<&str, usize> = dag
        .nodes
        .iter()
        .filter(|v| matches!(v.kind, NodeKind::Pi | NodeKind::Psi | NodeKind::Gate(_)))
        .map(|v| (v.net.as_str(), v.id))
        .collect();
    let first_cell = netlist.inputs.len();
    let pso_of_cell: HashMap<usize, usize> = dag
        .register_pairs
        .iter()
        .map(|&(pso, psi)| (dag.nodes[psi].origin, pso))
        .collect();
    let po_base = first_cell + netlist.cells.len();

    let route = |net: &str, sink: usize| -> String {
        let src = node_of_net[net];
        let e = edge_of[&(src, sink)];
        edge_net.get(&e).map_or_else(|| net.to_string(), |s| s.to_string())
    };

    let mut cells = Vec::with_capacity(netlist.cells.len() + count_inserted(plan));
    for (i, c) in netlist.cells.iter().enumerate() {
        let sink = pso_of_cell.get(&i).copied().unwrap_or(first_cell + i);
        cells.push(Cell {
            output: c.output.clone(),
            op: c.op,
            fanins: c.fanins.iter().map(|f| route(f, sink)).collect(),
        });
    }
    let mut depth_of = BTreeMap::new();
    let mut inserted = BTreeSet::new();
    for (chain, names) in plan.chains.iter().zip(&chain_names) {
        let mut prev = dag.nodes[chain.driver].net.clone();
        for (name, &d) in names.iter().zip(&chain.depths) {
            cells.push(Cell {
                output: name.clone(),
                op: Op::Dff,
                fanins: vec![prev],
            });
            depth_of.insert(Element::Net(name.clone()), d);
            inserted.insert(name.clone());
            prev = name.clone();
        }
    }
    let outputs: Vec<String> = netlist
        .outputs
        .iter()
        .enumerate()
        .map(|(k, o)| route(o, po_base + k))
        .collect();

    for v in &dag.nodes {
        match v.kind {
            NodeKind::Pi | NodeKind::Psi | NodeKind::Gate(_) => {
                depth_of.insert(Element::Net(v.net.clone()), phases.depth[v.id]);
            }
            NodeKind::Po => {
                depth_of.insert(Element::Output(v.origin), phases.depth[v.id]);
            }
            NodeKind::Pso => {}
        }
    }
    let phase_of = depth_of
        .iter()
        .map(|(e, &d)| (e.clone(), phase_of(d, n)))
        .collect();

    AnnotatedNetlist {
        netlist: Netlist {
            name: netlist.name.clone(),
            inputs: netlist.inputs.clone(),
            outputs,
            cells,
        },
        inserted,
        depth_of,
        phase_of,
        n_phases: n,
        d_loop,
        hold_safe: phases.hold_safe,
    }
}

/// One connection of an annotated netlist, with the depth of each end as
/// seen along the wire. A register's input end lies `d_loop` phases after
/// its own label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wire {
    pub from: Element,
    pub to: Element,
    pub from_depth: i64,
    pub to_depth: i64,
}

fn element_name(a: &AnnotatedNetlist, e: &Element) -> String {
    match e {
        Element::Net(n) => n.clone(),
        Element::Output(k) => format!("output {}", a.netlist.outputs[*k]),
    }
}

/// All distinct driver-to-sink connections of `a`.
pub fn wires(a: &AnnotatedNetlist) -> Result<Vec<Wire>, AssignmentError> {
    let depth = |e: &Element| {
        a.depth(e)
            .ok_or_else(|| AssignmentError::Unlabeled(element_name(a, e)))
    };
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for c in &a.netlist.cells {
        let to = Element::Net(c.output.clone());
        let mut to_depth = depth(&to)?;
        if a.is_register(c) {
            to_depth += a.d_loop as i64;
        }
        for f in &c.fanins {
            if seen.insert((f.clone(), c.output.clone())) {
                let from = Element::Net(f.clone());
                out.push(Wire {
                    from_depth: depth(&from)?,
                    from,
                    to: to.clone(),
                    to_depth,
                });
            }
        }
    }
    for (k, o) in a.netlist.outputs.iter().enumerate() {
        let from = Element::Net(o.clone());
        let to = Element::Output(k);
        out.push(Wire {
            from_depth: depth(&from)?,
            to_depth: depth(&to)?,
            from,
            to,
        });
    }
    Ok(out)
}

/// Checks that labels are complete and consistent, every wire spans
/// between 1 and `W` phases, and, for hold-safe netlists, that no wire
/// connects two elements on the same phase.
pub fn check_clocking(a: &AnnotatedNetlist) -> Result<(), AssignmentError> {
    for e in a.elements() {
        let name = || element_name(a, &e);
        let depth = a.depth(&e).ok_or_else(|| AssignmentError::Unlabeled(name()))?;
        let phase = a.phase(&e).ok_or_else(|| AssignmentError::Unlabeled(name()))?;
        let expected = phase_of(depth, a.n_phases);
        if phase != expected {
            return Err(AssignmentError::PhaseMismatch {
                element: name(),
                phase,
                depth,
                expected,
            });
        }
    }
    let w = a.window();
    for wire in wires(a)? {
        let gap = wire.to_depth - wire.from_depth;
        if !(1..=w).contains(&gap) {
            return Err(AssignmentError::GapOutsideWindow {
                from: element_name(a, &wire.from),
                to: element_name(a, &wire.to),
                gap,
                window: w,
            });
        }
    }
    if a.hold_safe {
        if let Some((from, to, phase)) = shared_phase_wires(a)?.into_iter().next() {
            return Err(AssignmentError::SharedPhase { from, to, phase });
        }
    }
    Ok(())
}

/// Wires whose two ends fire on the same phase.
pub fn shared_phase_wires(a: &AnnotatedNetlist) -> Result<Vec<(String, String, u32)>, AssignmentError> {
    let mut out = Vec::new();
    for wire in wires(a)? {
        let p = phase_of(wire.from_depth, a.n_phases);
        if p == phase_of(wire.to_depth, a.n_phases) {
            out.push((element_name(a, &wire.from), element_name(a, &wire.to), p));
        }
    }
    Ok(out)
}
