// SPDX-License-Identifier: Apache-2.0

//! A sequential circuit whose loops span `T * N` phases runs `T`
//! independent threads interleaved wave by wave. This checks each thread
//! against its own single-thread reference run.
//!
//! ```text
//! cargo run --example multithread_verify -- benchmarks/acc8.bench
//! ```

use std::path::PathBuf;

use sfq_clocking::formulation::{min_feasible_dloop, Mode};
use sfq_clocking::pipeline::run_lp;
use sfq_clocking::report::load_circuit;
use sfq_clocking::simulator::{random_inputs, simulate_golden, simulate_multiphase, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/acc8.bench"), PathBuf::from);
    let c = load_circuit(&path)?;
    if !c.netlist.is_sequential() {
        return Err("threads need register loops; pick a sequential circuit".into());
    }
    let span = min_feasible_dloop(&c.dag, 1);
    println!("{}: shortest loop span {span} phases", c.netlist.name);
    for threads in [1u32, 2, 4] {
        let n = span.div_ceil(threads);
        let design = run_lp(&c, &c.formulate(Mode::Baseline, n, Some(threads * n))?)?.design;
        let cfg = SimConfig { vectors_per_thread: 500, ..SimConfig::default() };
        let inputs = random_inputs(c.netlist.inputs.len(), threads as usize, cfg.vectors_per_thread, cfg.seed);
        let trace = simulate_multiphase(&design.annotated, &inputs, &cfg)?;
        let mut ok = trace.violations.is_empty();
        for (t, stream) in inputs.iter().enumerate() {
            let golden = simulate_golden(&c.netlist, stream)?;
            ok &= golden.iter().enumerate().all(|(k, g)| &trace.outputs[k][t] == g);
        }
        println!(
            "  T={threads} N={n}: {} DFFs, {} slots, {}",
            design.dff_count,
            trace.slots,
            if ok { "all threads match" } else { "MISMATCH" }
        );
    }
    Ok(())
}
