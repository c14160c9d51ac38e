// SPDX-License-Identifier: Apache-2.0

//! Hold-safe clocking keeps connected cells on different phases. It costs
//! about as much as the ordinary assignment with one phase fewer.
//!
//! ```text
//! cargo run --example hold_safe -- benchmarks/c499.bench
//! ```

use std::path::PathBuf;

use sfq_clocking::assignment::shared_phase_wires;
use sfq_clocking::formulation::Mode;
use sfq_clocking::pipeline::run_lp;
use sfq_clocking::report::load_circuit;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/c499.bench"), PathBuf::from);
    let c = load_circuit(&path)?;
    println!("{:>2} {:>10} {:>14} {:>18}", "N", "hold-safe", "baseline N-1", "same-phase wires");
    for n in 2..=4 {
        let hs = run_lp(&c, &c.formulate(Mode::HoldSafe, n, None)?)?.design;
        let base = run_lp(&c, &c.formulate(Mode::Baseline, n - 1, None)?)?.design;
        let plain = run_lp(&c, &c.formulate(Mode::Baseline, n, None)?)?.design;
        println!(
            "{n:>2} {:>10} {:>14} {:>8} (vs {} without)",
            hs.dff_count,
            base.dff_count,
            shared_phase_wires(&hs.annotated)?.len(),
            shared_phase_wires(&plain.annotated)?.len()
        );
    }
    Ok(())
}
