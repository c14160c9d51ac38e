// SPDX-License-Identifier: Apache-2.0

//! Runs every `.bench` file in a directory over several phase counts and
//! prints the savings table.
//!
//! ```text
//! cargo run --release --example batch_report -- benchmarks
//! ```

use std::path::PathBuf;
use std::time::Duration;

use sfq_clocking::formulation::Mode;
use sfq_clocking::report::{batch_report, RunOptions, SolverChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks"), PathBuf::from);
    let base = RunOptions {
        solver: SolverChoice::Both,
        node_limit: Some(100),
        time_limit: Duration::from_secs(60),
        ..RunOptions::default()
    };
    let report = batch_report(&dir, &[2, 3, 4], &[Mode::Baseline, Mode::Fanout], &base)?;
    print!("{}", report.to_text());
    Ok(())
}
