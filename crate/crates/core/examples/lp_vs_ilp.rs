// SPDX-License-Identifier: Apache-2.0

//! Compares the rounded LP relaxation with branch-and-bound across phase
//! counts, with and without the LP warm start.
//!
//! ```text
//! cargo run --release --example lp_vs_ilp -- benchmarks/c880.bench 500
//! ```

use std::path::PathBuf;
use std::time::Duration;

use sfq_clocking::formulation::Mode;
use sfq_clocking::pipeline::{run_ilp, run_lp};
use sfq_clocking::report::load_circuit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/c880.bench"), PathBuf::from);
    let nodes: usize = args.next().map_or(Ok(300), |s| s.parse())?;
    let c = load_circuit(&path)?;
    println!("{:>2} {:>9} {:>8} {:>8} {:>8} {:>10} {:>10}", "N", "LP bound", "rounded", "ILP", "status", "warm nodes", "cold nodes");
    for n in 2..=4 {
        let inst = c.formulate(Mode::Baseline, n, None)?;
        let lp = run_lp(&c, &inst)?;
        let limit = Duration::from_secs(300);
        let warm = run_ilp(&c, &inst, limit, Some(nodes), Some(&lp.design.depths))?;
        let cold = run_ilp(&c, &inst, limit, Some(nodes), None)?;
        println!(
            "{n:>2} {:>9.1} {:>8} {:>8} {:>8?} {:>10} {:>10}",
            lp.solution.objective,
            lp.design.dff_count,
            warm.design.as_ref().map_or(0, |d| d.dff_count),
            warm.solution.status,
            warm.solution.stats.branch_nodes,
            cold.solution.stats.branch_nodes
        );
    }
    Ok(())
}
