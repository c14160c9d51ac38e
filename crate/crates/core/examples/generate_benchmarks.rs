// SPDX-License-Identifier: Apache-2.0

//! Regenerates the synthetic sequential benchmarks bundled next to the
//! ISCAS circuits.
//!
//! ```text
//! cargo run --example generate_benchmarks -- [OUT_DIR]
//! ```
//!
//! Output is fully determined by the generator seeds, so rerunning
//! reproduces the files byte for byte. Pass `--extra` to also write a few
//! parameterized combinational circuits that are not part of the suite.

use std::path::{Path, PathBuf};

use sfq_clocking::bench::{write_bench, Netlist};
use sfq_clocking::generate::{
    accumulator, array_multiplier, comparator, counter, decoder, lfsr, parity_chain,
    random_netlist, ripple_adder,
};

fn main() -> std::io::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let extra = args.iter().any(|a| a == "--extra");
    let out = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks"), PathBuf::from);
    std::fs::create_dir_all(&out)?;

    let mut suite: Vec<Netlist> = vec![
        counter(8),
        lfsr(16, &[10, 12, 13, 15]),
        accumulator(8),
        random_netlist("rand120_seq", 1, 8, 120, 6, 6),
    ];
    if extra {
        suite.extend([
            ripple_adder(8),
            array_multiplier(4, false),
            array_multiplier(16, true),
            parity_chain(16),
            comparator(8),
            decoder(4),
        ]);
    }
    for n in &suite {
        write(&out, n)?;
    }
    Ok(())
}

fn write(dir: &Path, n: &Netlist) -> std::io::Result<()> {
    let path = dir.join(format!("{}.bench", n.name));
    std::fs::write(&path, write_bench(n))?;
    println!(
        "{:<40} {:>5} gates {:>3} registers",
        path.display(),
        n.num_gates(),
        n.num_registers()
    );
    Ok(())
}
