// SPDX-License-Identifier: Apache-2.0

//! Single-phase full path balancing: every path from an input to an output
//! crosses the same number of clocked cells.
//!
//! ```text
//! cargo run --example full_path_balancing -- benchmarks/c432.bench
//! ```

use std::path::PathBuf;
use std::time::Duration;

use sfq_clocking::formulation::Mode;
use sfq_clocking::pipeline::{run_ilp, run_lp, verify_design};
use sfq_clocking::report::load_circuit;
use sfq_clocking::simulator::SimConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/c432.bench"), PathBuf::from);
    let c = load_circuit(&path)?;
    let inst = c.formulate(Mode::Fpb, 1, None)?;
    let lp = run_lp(&c, &inst)?;
    // A difference-constraint system: the LP vertex is already integral.
    let ilp = run_ilp(&c, &inst, Duration::from_secs(60), None, Some(&lp.design.depths))?;
    let design = ilp.design.as_ref().unwrap_or(&lp.design);
    println!(
        "{}: {} gates need {} balancing DFFs, latency {} cycles",
        c.netlist.name,
        c.netlist.num_gates(),
        design.dff_count,
        design.phases.latency_cycles
    );
    let report = verify_design(&c, design, &SimConfig { vectors_per_thread: 200, ..SimConfig::default() })?;
    println!("{report}");
    Ok(())
}
