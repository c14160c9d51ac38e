// SPDX-License-Identifier: Apache-2.0

//! Parses a `.bench` file and prints the optimization graph it becomes.
//!
//! ```text
//! cargo run --example inspect_netlist -- benchmarks/s27.bench [graph.dot]
//! ```

use std::path::PathBuf;

use sfq_clocking::dag::NodeKind;
use sfq_clocking::formulation::min_feasible_dloop;
use sfq_clocking::report::load_circuit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/s27.bench"), PathBuf::from);
    let c = load_circuit(&path)?;
    let n = &c.netlist;
    println!("{}: {} inputs, {} outputs, {} gates, {} registers", n.name, n.inputs.len(), n.outputs.len(), n.num_gates(), n.num_registers());

    let dag = &c.dag;
    let count = |k: NodeKind| dag.nodes.iter().filter(|x| x.kind == k).count();
    println!(
        "graph: {} nodes ({} PI, {} PO, {} PSI/PSO pairs), {} edges",
        dag.num_nodes(),
        count(NodeKind::Pi),
        count(NodeKind::Po),
        dag.register_pairs.len(),
        dag.edges.len()
    );
    let fanout = (0..dag.num_nodes()).map(|v| dag.out_degree(v)).max().unwrap_or(0);
    println!("largest fanout: {fanout}");
    if !dag.register_pairs.is_empty() {
        for n_phases in 1..=4 {
            println!("  N={n_phases}: shortest loop span {}", min_feasible_dloop(dag, n_phases));
        }
    }
    if let Some(dot) = args.next() {
        std::fs::write(&dot, dag.to_dot())?;
        println!("wrote {dot}");
    }
    Ok(())
}
