// SPDX-License-Identifier: Apache-2.0

//! Shows how much a shared, tapped DFF chain per driver saves over one
//! chain per connection, and where the chains end up.
//!
//! ```text
//! cargo run --example fanout_sharing -- benchmarks/c1908.bench 3
//! ```

use std::path::PathBuf;

use sfq_clocking::formulation::Mode;
use sfq_clocking::pipeline::run_lp;
use sfq_clocking::report::load_circuit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/c1908.bench"), PathBuf::from);
    let n: u32 = args.next().map_or(Ok(2), |s| s.parse())?;
    let c = load_circuit(&path)?;

    let base = run_lp(&c, &c.formulate(Mode::Baseline, n, None)?)?.design;
    let shared = run_lp(&c, &c.formulate(Mode::Fanout, n, None)?)?.design;
    let saved = base.dff_count as f64 - shared.dff_count as f64;
    println!(
        "{} N={n}: per-connection {} DFFs, shared chains {} DFFs ({:.1}% fewer)",
        c.netlist.name,
        base.dff_count,
        shared.dff_count,
        100.0 * saved / base.dff_count.max(1) as f64
    );

    let mut chains: Vec<_> = shared.plan.chains.iter().filter(|ch| !ch.depths.is_empty()).collect();
    chains.sort_by_key(|ch| std::cmp::Reverse(ch.taps.len()));
    for ch in chains.iter().take(5) {
        println!(
            "  {}: {} DFFs feeding {} sinks",
            c.dag.nodes[ch.driver].label,
            ch.depths.len(),
            ch.taps.len()
        );
    }
    Ok(())
}
