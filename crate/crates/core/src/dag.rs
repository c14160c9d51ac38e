// SPDX-License-Identifier: Apache-2.0

//! Optimization graph of a netlist.
//!
//! Registers are split into a pseudo-input (PSI) that drives the register's
//! output net and a pseudo-output (PSO) that absorbs its input net, which
//! makes every well-formed sequential netlist acyclic. Node ids are laid out
//! as: primary inputs, cells (gates and PSIs in netlist order), primary
//! outputs, then PSOs in register order.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt::Write;

use thiserror::Error;

use crate::bench::{Netlist, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Pi,
    Po,
    Psi,
    Pso,
    Gate(Op),
}

impl NodeKind {
    pub fn is_source(self) -> bool {
        matches!(self, NodeKind::Pi | NodeKind::Psi)
    }

    pub fn is_sink(self) -> bool {
        matches!(self, NodeKind::Po | NodeKind::Pso)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    /// Net the node stands for: driven net for PI/GATE/PSI, observed net for
    /// PO/PSO.
    pub net: String,
    /// Index into `Netlist::cells` for GATE, PSI and PSO nodes; index into
    /// `Netlist::outputs` for PO nodes; index into `Netlist::inputs` for PIs.
    pub origin: usize,
    /// Unique identifier used for variable names. Never contains `~` unless
    /// the node is a sink.
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Number of fanin slots of `dst` fed by `src`.
    pub multiplicity: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("combinational cycle through {}", .0.join(" -> "))]
    CombinationalCycle(Vec<String>),
    #[error("net `{0}` has no driver")]
    DanglingNet(String),
}

#[derive(Clone, Debug)]
pub struct CircuitDag {
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// (pso, psi) per register, in netlist order.
    pub register_pairs: Vec<(usize, usize)>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl CircuitDag {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out_edges[node].iter().map(|&e| &self.edges[e])
    }

    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.in_edges[node].iter().map(|&e| &self.edges[e])
    }

    pub fn out_edge_ids(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_edges[node].len()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_edges[node].len()
    }

    pub fn nodes_of(&self, kind: fn(NodeKind) -> bool) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter(move |n| kind(n.kind)).map(|n| n.id)
    }

    pub fn primary_inputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes_of(|k| k == NodeKind::Pi)
    }

    pub fn primary_outputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes_of(|k| k == NodeKind::Po)
    }

    pub fn num_gates(&self) -> usize {
        self.nodes_of(|k| matches!(k, NodeKind::Gate(_))).count()
    }

    /// Deterministic topological order, ties broken by smaller node id.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Graphviz rendering for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", self.name);
        out.push_str("  rankdir=LR;\n");
        for n in &self.nodes {
            let (shape, text) = match n.kind {
                NodeKind::Pi => ("invtriangle", format!("PI {}", n.net)),
                NodeKind::Po => ("triangle", format!("PO {}", n.net)),
                NodeKind::Psi => ("box", format!("PSI {}", n.net)),
                NodeKind::Pso => ("box", format!("PSO {}", n.net)),
                NodeKind::Gate(op) => ("ellipse", format!("{op} {}", n.net)),
            };
            let _ = writeln!(out, "  n{} [shape={shape}, label=\"{text}\"];", n.id);
        }
        for e in &self.edges {
            if e.multiplicity > 1 {
                let _ = writeln!(out, "  n{} -> n{} [label=\"x{}\"];", e.src, e.dst, e.multiplicity);
            } else {
                let _ = writeln!(out, "  n{} -> n{};", e.src, e.dst);
            }
        }
        for &(pso, psi) in &self.register_pairs {
            let _ = writeln!(out, "  n{pso} -> n{psi} [style=dashed, constraint=false];");
        }
        out.push_str("}\n");
        out
    }
}

fn topo_sort(n: usize, edges: &[Edge], out_edges: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut indeg = vec![0usize; n];
    for e in edges {
        indeg[e.dst] += 1;
    }
    let mut heap: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for &e in &out_edges[v] {
            let w = edges[e].dst;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse(w));
            }
        }
    }
    (order, indeg)
}

/// Walks backwards from a node left over by Kahn's algorithm until a node
/// repeats; the repeated stretch is a cycle.
fn find_cycle(start: usize, remaining: &[usize], in_edges: &[Vec<usize>], edges: &[Edge]) -> Vec<usize> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut v = start;
    loop {
        if let Some(&pos) = seen.get(&v) {
            let mut cycle: Vec<usize> = path[pos..].to_vec();
            cycle.reverse();
            return cycle;
        }
        seen.insert(v, path.len());
        path.push(v);
        v = in_edges[v]
            .iter()
            .map(|&e| edges[e].src)
            .find(|&u| remaining[u] > 0)
            .expect("node left by Kahn's algorithm has a remaining predecessor");
    }
}

/// Builds the optimization graph of `netlist`.
pub fn build_dag(netlist: &Netlist) -> Result<CircuitDag, DagError> {
    let mut nodes = Vec::new();
    let mut push = |kind: NodeKind, net: &str, origin: usize, label: String| {
        let id = nodes.len();
        nodes.push(Node {
            id,
            kind,
            net: net.to_string(),
            origin,
            label,
        });
        id
    };

    let mut net_node: HashMap<&str, usize> = HashMap::new();
    for (i, n) in netlist.inputs.iter().enumerate() {
        net_node.insert(n, push(NodeKind::Pi, n, i, n.clone()));
    }
    let mut cell_node = Vec::with_capacity(netlist.cells.len());
    for (i, c) in netlist.cells.iter().enumerate() {
        let kind = if c.op == Op::Dff {
            NodeKind::Psi
        } else {
            NodeKind::Gate(c.op)
        };
        let id = push(kind, &c.output, i, c.output.clone());
        net_node.insert(&c.output, id);
        cell_node.push(id);
    }
    let mut po_nodes = Vec::with_capacity(netlist.outputs.len());
    for (k, o) in netlist.outputs.iter().enumerate() {
        po_nodes.push(push(NodeKind::Po, o, k, format!("{o}~po{k}")));
    }
    let mut register_pairs = Vec::new();
    let mut pso_of_cell = HashMap::new();
    for (i, c) in netlist.cells.iter().enumerate() {
        if c.op == Op::Dff {
            let pso = push(NodeKind::Pso, &c.fanins[0], i, format!("{}~pso", c.output));
            register_pairs.push((pso, cell_node[i]));
            pso_of_cell.insert(i, pso);
        }
    }

    let lookup = |net: &str| -> Result<usize, DagError> {
        net_node
            .get(net)
            .copied()
            .ok_or_else(|| DagError::DanglingNet(net.to_string()))
    };
    // (src, dst) -> multiplicity, ordered for deterministic edge ids.
    let mut edge_map: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for (i, c) in netlist.cells.iter().enumerate() {
        let dst = match pso_of_cell.get(&i) {
            Some(&pso) => pso,
            None => cell_node[i],
        };
        for f in &c.fanins {
            *edge_map.entry((lookup(f)?, dst)).or_insert(0) += 1;
        }
    }
    for (k, o) in netlist.outputs.iter().enumerate() {
        *edge_map.entry((lookup(o)?, po_nodes[k])).or_insert(0) += 1;
    }
    let edges: Vec<Edge> = edge_map
        .into_iter()
        .map(|((src, dst), multiplicity)| Edge {
            src,
            dst,
            multiplicity,
        })
        .collect();

    let n = nodes.len();
    let mut out_edges = vec![Vec::new(); n];
    let mut in_edges = vec![Vec::new(); n];
    for (e, edge) in edges.iter().enumerate() {
        out_edges[edge.src].push(e);
        in_edges[edge.dst].push(e);
    }
    let (order, remaining) = topo_sort(n, &edges, &out_edges);
    if order.len() < n {
        let start = (0..n).find(|&v| remaining[v] > 0).unwrap();
        let cycle = find_cycle(start, &remaining, &in_edges, &edges);
        return Err(DagError::CombinationalCycle(
            cycle.into_iter().map(|v| nodes[v].net.clone()).collect(),
        ));
    }

    Ok(CircuitDag {
        name: netlist.name.clone(),
        nodes,
        edges,
        register_pairs,
        out_edges,
        in_edges,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;

    fn dag(text: &str) -> CircuitDag {
        build_dag(&parse_bench(text).unwrap()).unwrap()
    }

    #[test]
    fn single_and() {
        let d = dag("INPUT(a)\nINPUT(b)\nOUTPUT(c)\nc = AND(a, b)");
        assert_eq!(d.num_nodes(), 4);
        assert_eq!(d.edges.len(), 3);
        assert_eq!(d.nodes[2].kind, NodeKind::Gate(Op::And));
        assert_eq!(d.nodes[3].kind, NodeKind::Po);
    }

    #[test]
    fn register_split() {
        let d = dag("INPUT(a)\nOUTPUT(c)\nq = DFF(a)\nc = AND(q, a)");
        // a, q(psi), c, c~po0, q~pso
        assert_eq!(d.num_nodes(), 5);
        assert_eq!(d.register_pairs, vec![(4, 1)]);
        assert_eq!(d.nodes[1].kind, NodeKind::Psi);
        assert_eq!(d.in_degree(1), 0);
        assert_eq!(d.in_degree(4), 1);
        assert_eq!(d.out_degree(4), 0);
        assert!(d.edges.iter().any(|e| e.src == 0 && e.dst == 4));
        assert!(d.edges.iter().any(|e| e.src == 1 && e.dst == 2));
    }

    #[test]
    fn combinational_cycle_is_reported() {
        let n = parse_bench("INPUT(a)\nOUTPUT(c)\nc = AND(a, d)\nd = NOT(c)").unwrap();
        match build_dag(&n) {
            Err(DagError::CombinationalCycle(c)) => {
                assert_eq!(c.len(), 2);
                assert!(c.contains(&"c".to_string()) && c.contains(&"d".to_string()));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn parallel_edges_collapse() {
        let d = dag("INPUT(a)\nOUTPUT(c)\nc = XOR(a, a)");
        let e: Vec<_> = d.in_edges(1).collect();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].multiplicity, 2);
    }

    #[test]
    fn feedback_loop_through_register_is_acyclic() {
        let d = dag("INPUT(a)\nOUTPUT(q)\nq = DFF(n)\nn = XOR(a, q)");
        assert_eq!(d.topological_order().len(), d.num_nodes());
    }

    #[test]
    fn topological_orders() {
        let d = dag("INPUT(a)\nOUTPUT(c)\nb = NOT(a)\nc = BUFF(b)");
        assert_eq!(d.topological_order(), &[0, 1, 2, 3]);
        let d = dag("INPUT(a)\nOUTPUT(d)\nb = NOT(a)\nc = BUFF(a)\nd = AND(b, c)");
        let order = d.topological_order();
        assert_eq!(order[0], 0);
        assert_eq!(*order.last().unwrap(), 4);
    }

    #[test]
    fn pi_straight_to_po() {
        let d = dag("INPUT(a)\nOUTPUT(a)");
        assert_eq!(d.edges, vec![Edge { src: 0, dst: 1, multiplicity: 1 }]);
    }

    #[test]
    fn dot_mentions_every_node() {
        let d = dag("INPUT(a)\nOUTPUT(q)\nq = DFF(a)");
        let dot = d.to_dot();
        assert!(dot.contains("PSI q") && dot.contains("PSO a") && dot.contains("style=dashed"));
    }
}
