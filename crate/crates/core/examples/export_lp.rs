// SPDX-License-Identifier: Apache-2.0

//! Writes the integer program in CPLEX LP format for an external solver.
//!
//! ```text
//! cargo run --example export_lp -- benchmarks/c17.bench fanout 3 > c17.lp
//! ```

use std::path::PathBuf;

use sfq_clocking::formulation::Mode;
use sfq_clocking::report::load_circuit;
use sfq_clocking::solver::export_lp_format;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/c17.bench"), PathBuf::from);
    let mode: Mode = args.next().as_deref().unwrap_or("baseline").parse()?;
    let n: u32 = args.next().map_or(Ok(if mode == Mode::Fpb { 1 } else { 2 }), |s| s.parse())?;
    let c = load_circuit(&path)?;
    let inst = c.formulate(mode, n, None)?;
    eprintln!(
        "{} {mode} N={n}: {} variables, {} constraints",
        c.netlist.name,
        inst.model().vars.len(),
        inst.num_constraints()
    );
    print!("{}", export_lp_format(inst.model(), true));
    Ok(())
}
