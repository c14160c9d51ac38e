// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use sfq_clocking::bench::parse_annotated;
use sfq_clocking::cli::{main_with, EXIT_OK, EXIT_PARSE, EXIT_USAGE};

fn bench(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("benchmarks")
        .join(format!("{name}.bench"))
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sfq-clock").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn json_reports_are_reproducible() {
    let s27 = bench("s27");
    let args = ["--input", &s27, "--phases", "3", "--mode", "fanout", "--verify", "--vectors", "50", "--report", "json", "--omit-timings"];
    let (code, first, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    let (_, second, _) = run(&args);
    assert_eq!(first, second);
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["n_phases"], 3);
    assert!(v["lp_dffs"].as_u64().unwrap() >= v["ilp_dffs"].as_u64().unwrap());
}

#[test]
fn emitted_netlist_is_annotated() {
    let dir = tempfile::tempdir().unwrap();
    let emit: PathBuf = dir.path().join("c17_2ph.bench");
    let lp: PathBuf = dir.path().join("c17.lp");
    let c17 = bench("c17");
    let (code, _, err) = run(&["--input", &c17, "--emit", path_str(&emit), "--export-lp", path_str(&lp)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let a = parse_annotated(&std::fs::read_to_string(&emit).unwrap()).unwrap();
    assert_eq!(a.n_phases, 2);
    let lp_text = std::fs::read_to_string(&lp).unwrap();
    assert!(lp_text.starts_with("\\") || lp_text.contains("Minimize"));
    assert!(lp_text.contains("General"));
}

#[test]
fn fpb_forces_one_phase() {
    let c17 = bench("c17");
    let (code, out, _) = run(&["--input", &c17, "--mode", "fpb", "--report", "json", "--omit-timings"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n_phases"], 1);
}

#[test]
fn usage_errors() {
    let s27 = bench("s27");
    let (code, _, err) = run(&["--input", &s27, "--phases", "2", "--dloop", "5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("must be a multiple of N"), "{err}");

    let (code, _, _) = run(&["--input", &s27, "--phases", "1", "--mode", "holdsafe"]);
    assert_eq!(code, EXIT_USAGE);

    let (code, _, _) = run(&["--input", &s27, "--mode", "fpb", "--phases", "2"]);
    assert_eq!(code, EXIT_USAGE);

    let (code, _, _) = run(&["--phases", "2"]);
    assert_eq!(code, EXIT_USAGE);

    let (code, _, _) = run(&["--input", &s27, "--mode", "sideways"]);
    assert_eq!(code, EXIT_USAGE);

    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("--phases"));
}

#[test]
fn parse_error_removes_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.bench");
    std::fs::write(&broken, "INPUT(a)\nOUTPUT(b)\nb = FROB(a)\n").unwrap();
    let dot = dir.path().join("broken.dot");
    let (code, _, err) = run(&["--input", path_str(&broken), "--dump-dot", path_str(&dot)]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("line 3"), "{err}");
    assert!(!dot.exists());

    let (code, _, _) = run(&["--input", path_str(&dir.path().join("missing.bench"))]);
    assert_ne!(code, EXIT_OK);
}

#[test]
fn failed_run_leaves_no_files_behind() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("s27.dot");
    let s27 = bench("s27");
    // The DOT dump happens before formulation rejects the loop span.
    let (code, _, _) = run(&["--input", &s27, "--phases", "2", "--dloop", "3", "--dump-dot", path_str(&dot)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!dot.exists());
}

#[test]
fn batch_covers_every_file() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["c17", "s27"] {
        std::fs::copy(bench(name), dir.path().join(format!("{name}.bench"))).unwrap();
    }
    let (code, out, err) = run(&[
        "--batch",
        path_str(dir.path()),
        "--batch-phases",
        "2,3",
        "--batch-modes",
        "baseline,fanout",
        "--report",
        "json",
        "--omit-timings",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert!(v["errors"].as_array().unwrap().is_empty());
}
