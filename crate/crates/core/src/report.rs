// SPDX-License-Identifier: Apache-2.0

//! Single-run and batch reports.
//!
//! JSON reports carry `"schema": 1`. Wall times are milliseconds in JSON and
//! seconds in text; both are left out when timings are omitted so that
//! identical inputs produce byte-identical reports.

use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::formulation::{Mode, ProblemInstance};
use crate::pipeline::{run_ilp, run_lp, verify_design, Circuit, Design, FlowError, IlpRun, LpRun};
use crate::simulator::{SimConfig, VerifyReport};
use crate::solver::{SolveStatus, DEFAULT_TIME_LIMIT};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Lp,
    Ilp,
    Both,
}

impl SolverChoice {
    pub fn lp(self) -> bool {
        self != SolverChoice::Ilp
    }

    pub fn ilp(self) -> bool {
        self != SolverChoice::Lp
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lp" => Ok(SolverChoice::Lp),
            "ilp" => Ok(SolverChoice::Ilp),
            "both" => Ok(SolverChoice::Both),
            _ => Err(format!("unknown solver `{s}` (expected lp, ilp or both)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub mode: Mode,
    pub n_phases: u32,
    pub d_loop: Option<u32>,
    pub solver: SolverChoice,
    pub time_limit: Duration,
    pub node_limit: Option<usize>,
    /// Seed the ILP with the rounded LP design when both are run.
    pub warm_start: bool,
    pub verify: Option<SimConfig>,
    pub omit_timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: Mode::Baseline,
            n_phases: 2,
            d_loop: None,
            solver: SolverChoice::Both,
            time_limit: DEFAULT_TIME_LIMIT,
            node_limit: None,
            warm_start: true,
            verify: None,
            omit_timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl From<&VerifyReport> for Verdict {
    fn from(r: &VerifyReport) -> Self {
        Verdict {
            pass: r.pass,
            detail: r.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub benchmark: String,
    pub mode: String,
    pub n_phases: u32,
    pub d_loop: u32,
    pub threads: u32,
    pub gates: usize,
    pub registers: usize,
    pub fpb_dffs: Option<usize>,
    pub lp_objective: Option<f64>,
    pub lp_dffs: Option<usize>,
    pub ilp_objective: Option<f64>,
    pub ilp_bound: Option<f64>,
    pub ilp_dffs: Option<usize>,
    /// `optimal`, `incumbent`, `nosolution`, or absent when the ILP was not run.
    pub ilp_status: Option<SolveStatus>,
    pub ilp_branch_nodes: Option<usize>,
    /// Savings of the best variant design against FPB, in percent.
    pub savings_percent: Option<f64>,
    pub latency_cycles: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_time_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ilp_time_ms: Option<u64>,
    pub verify_lp: Option<Verdict>,
    pub verify_ilp: Option<Verdict>,
}

impl RunReport {
    /// Count of the design the report recommends: ILP when it produced one.
    pub fn best_dffs(&self) -> Option<usize> {
        self.ilp_dffs.or(self.lp_dffs)
    }

    pub fn verified(&self) -> bool {
        self.verify_lp.as_ref().is_none_or(|v| v.pass)
            && self.verify_ilp.as_ref().is_none_or(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
        let _ = writeln!(out, "benchmark      {}", self.benchmark);
        let _ = writeln!(
            out,
            "clocking       {} N={} d_loop={} threads={}",
            self.mode, self.n_phases, self.d_loop, self.threads
        );
        let _ = writeln!(out, "circuit        {} gates, {} registers", self.gates, self.registers);
        let _ = writeln!(out, "fpb dffs       {}", opt(self.fpb_dffs));
        if let Some(obj) = self.lp_objective {
            let _ = writeln!(out, "lp dffs        {} (relaxation {:.3})", opt(self.lp_dffs), obj);
        }
        if let Some(status) = self.ilp_status {
            let mark = if status == SolveStatus::Incumbent { "*" } else { "" };
            let _ = writeln!(
                out,
                "ilp dffs       {}{mark} ({}, {} branch nodes)",
                opt(self.ilp_dffs),
                status_name(Some(status)),
                self.ilp_branch_nodes.unwrap_or(0)
            );
        }
        if let Some(s) = self.savings_percent {
            let _ = writeln!(out, "savings        {s:.1}% vs fpb");
        }
        if let Some(l) = self.latency_cycles {
            let _ = writeln!(out, "latency        {l} cycles");
        }
        if let Some(ms) = self.lp_time_ms {
            let _ = writeln!(out, "lp time        {}", seconds(ms));
        }
        if let Some(ms) = self.ilp_time_ms {
            let _ = writeln!(out, "ilp time       {}", seconds(ms));
        }
        for (label, v) in [("verify lp", &self.verify_lp), ("verify ilp", &self.verify_ilp)] {
            if let Some(v) = v {
                let _ = writeln!(out, "{label:<14} {}", v.detail);
            }
        }
        out
    }
}

fn status_name(s: Option<SolveStatus>) -> &'static str {
    match s {
        Some(SolveStatus::Optimal) => "optimal",
        Some(SolveStatus::Incumbent) => "incumbent",
        Some(SolveStatus::Infeasible) => "infeasible",
        Some(SolveStatus::NoSolution) => "no solution",
        None => "-",
    }
}

fn seconds(ms: u64) -> String {
    format!("{:.3}s", ms as f64 / 1000.0)
}

/// `(fpb - variant) / fpb` in percent, rounded to 0.1.
pub fn savings_percent(fpb: usize, variant: usize) -> Option<f64> {
    if fpb == 0 {
        return None;
    }
    let s = (fpb as f64 - variant as f64) / fpb as f64 * 100.0;
    Some((s * 10.0).round() / 10.0)
}

/// Everything a run produced, for callers that want the designs.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub instance: ProblemInstance,
    pub lp: Option<LpRun>,
    pub ilp: Option<IlpRun>,
}

impl RunOutcome {
    /// ILP design when available, otherwise the rounded LP design.
    pub fn best_design(&self) -> Option<&Design> {
        self.ilp
            .as_ref()
            .and_then(|r| r.design.as_ref())
            .or(self.lp.as_ref().map(|r| &r.design))
    }
}

/// DFF count of single-phase full path balancing with the same solver.
pub fn fpb_count(circuit: &Circuit, opts: &RunOptions) -> Result<Option<usize>, FlowError> {
    let inst = circuit.formulate(Mode::Fpb, 1, None)?;
    let lp = run_lp(circuit, &inst)?;
    if !opts.solver.ilp() {
        return Ok(Some(lp.design.dff_count));
    }
    let ilp = run_ilp(
        circuit,
        &inst,
        opts.time_limit,
        opts.node_limit,
        opts.warm_start.then_some(&lp.design.depths),
    )?;
    Ok(ilp.design.map(|d| d.dff_count))
}

/// Solves, realizes and optionally verifies one configuration.
pub fn run(circuit: &Circuit, opts: &RunOptions) -> Result<RunOutcome, FlowError> {
    let inst = circuit.formulate(opts.mode, opts.n_phases, opts.d_loop)?;
    let fpb = if opts.mode == Mode::Fpb {
        None
    } else {
        fpb_count(circuit, opts)?
    };

    // The LP also provides the ILP warm start.
    let need_lp = opts.solver.lp() || opts.warm_start;
    let lp = need_lp.then(|| run_lp(circuit, &inst)).transpose()?;
    let ilp = if opts.solver.ilp() {
        let warm = opts
            .warm_start
            .then(|| lp.as_ref().map(|r| &r.design.depths))
            .flatten();
        Some(run_ilp(circuit, &inst, opts.time_limit, opts.node_limit, warm)?)
    } else {
        None
    };
    let lp = if opts.solver.lp() { lp } else { None };

    let ms = |d: Duration| (!opts.omit_timings).then_some(d.as_millis() as u64);
    let ilp_design = ilp.as_ref().and_then(|r| r.design.as_ref());
    let mut report = RunReport {
        schema: SCHEMA_VERSION,
        benchmark: circuit.netlist.name.clone(),
        mode: opts.mode.to_string(),
        n_phases: inst.n_phases(),
        d_loop: inst.d_loop(),
        threads: inst.threads(),
        gates: circuit.netlist.num_gates(),
        registers: circuit.netlist.num_registers(),
        fpb_dffs: fpb,
        lp_objective: lp.as_ref().map(|r| round6(r.solution.objective)),
        lp_dffs: lp.as_ref().map(|r| r.design.dff_count),
        ilp_objective: ilp
            .as_ref()
            .filter(|r| r.solution.has_values())
            .map(|r| round6(r.solution.objective)),
        ilp_bound: ilp.as_ref().map(|r| round6(r.solution.bound)),
        ilp_dffs: ilp_design.map(|d| d.dff_count),
        ilp_status: ilp.as_ref().map(|r| r.solution.status),
        ilp_branch_nodes: ilp.as_ref().map(|r| r.solution.stats.branch_nodes),
        savings_percent: None,
        latency_cycles: None,
        lp_time_ms: lp.as_ref().and_then(|r| ms(r.solution.stats.wall_time)),
        ilp_time_ms: ilp.as_ref().and_then(|r| ms(r.solution.stats.wall_time)),
        verify_lp: None,
        verify_ilp: None,
    };
    // FPB runs compare against themselves.
    let fpb_ref = if opts.mode == Mode::Fpb {
        report.best_dffs()
    } else {
        fpb
    };
    report.fpb_dffs = fpb_ref;
    report.savings_percent = fpb_ref
        .zip(report.best_dffs())
        .and_then(|(f, v)| savings_percent(f, v));

    let outcome_design = ilp_design.or(lp.as_ref().map(|r| &r.design));
    report.latency_cycles = outcome_design.map(|d| d.phases.latency_cycles);
    if let Some(cfg) = &opts.verify {
        if let Some(r) = &lp {
            report.verify_lp = Some(Verdict::from(&verify_design(circuit, &r.design, cfg)?));
        }
        if let Some(d) = ilp_design {
            report.verify_ilp = Some(Verdict::from(&verify_design(circuit, d, cfg)?));
        }
    }
    Ok(RunOutcome {
        report,
        instance: inst,
        lp,
        ilp,
    })
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchError {
    pub benchmark: String,
    pub mode: String,
    pub n_phases: u32,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Totals {
    pub fpb_dffs: usize,
    pub lp_dffs: usize,
    pub ilp_dffs: usize,
    pub savings_percent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchReport {
    pub schema: u32,
    pub rows: Vec<RunReport>,
    pub errors: Vec<BatchError>,
    pub totals: Totals,
    pub warnings: Vec<String>,
}

impl BatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let header = [
            "benchmark", "mode", "N", "T", "FPB", "LP", "ILP", "savings", "LP time", "ILP time",
            "verify",
        ];
        let mut table: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
        for r in &self.rows {
            let ilp = match (r.ilp_dffs, r.ilp_status) {
                (Some(v), Some(SolveStatus::Incumbent)) => format!("{v}*"),
                (v, _) => opt(v),
            };
            let verify = match (&r.verify_lp, &r.verify_ilp) {
                (None, None) => "-".to_string(),
                _ if r.verified() => "pass".to_string(),
                _ => "FAIL".to_string(),
            };
            table.push(vec![
                r.benchmark.clone(),
                r.mode.clone(),
                r.n_phases.to_string(),
                r.threads.to_string(),
                opt(r.fpb_dffs),
                opt(r.lp_dffs),
                ilp,
                r.savings_percent.map_or("-".into(), |s| format!("{s:.1}%")),
                r.lp_time_ms.map_or("-".into(), seconds),
                r.ilp_time_ms.map_or("-".into(), seconds),
                verify,
            ]);
        }
        let t = &self.totals;
        table.push(vec![
            "total".into(),
            String::new(),
            String::new(),
            String::new(),
            t.fpb_dffs.to_string(),
            t.lp_dffs.to_string(),
            t.ilp_dffs.to_string(),
            t.savings_percent.map_or("-".into(), |s| format!("{s:.1}%")),
            String::new(),
            String::new(),
            String::new(),
        ]);
        let widths: Vec<usize> = (0..header.len())
            .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
            .collect();
        for (i, row) in table.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c < 2 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 || i + 2 == table.len() {
                let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {} {} N={}: {}", e.benchmark, e.mode, e.n_phases, e.error);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// `.bench` files of `dir`, sorted by name.
pub fn bench_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bench"))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a `.bench` file, naming the circuit after the file stem.
pub fn load_circuit(path: &Path) -> Result<Circuit, FlowError> {
    let text = std::fs::read_to_string(path).map_err(|source| FlowError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map_or_else(|| "circuit".to_string(), |s| s.to_string_lossy().into_owned());
    Circuit::parse(&name, &text)
}

/// Runs every benchmark of `dir` for each phase count and mode. Parameter
/// combinations that are invalid by construction (FPB beyond one phase,
/// hold-safe at one phase) are skipped; other failures are recorded and the
/// batch continues.
pub fn batch_report(dir: &Path, phases: &[u32], modes: &[Mode], base: &RunOptions) -> std::io::Result<BatchReport> {
    let files = bench_files(dir)?;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    if files.is_empty() {
        warnings.push(format!("no .bench files in {}", dir.display()));
    }
    for path in &files {
        let circuit = match load_circuit(path) {
            Ok(c) => c,
            Err(e) => {
                errors.push(BatchError {
                    benchmark: path.display().to_string(),
                    mode: String::new(),
                    n_phases: 0,
                    error: e.to_string(),
                });
                continue;
            }
        };
        for &n in phases {
            for &mode in modes {
                if (mode == Mode::Fpb && n != 1) || (mode == Mode::HoldSafe && n < 2) {
                    continue;
                }
                let opts = RunOptions {
                    mode,
                    n_phases: n,
                    ..base.clone()
                };
                match run(&circuit, &opts) {
                    Ok(o) => rows.push(o.report),
                    Err(e) => errors.push(BatchError {
                        benchmark: circuit.netlist.name.clone(),
                        mode: mode.to_string(),
                        n_phases: n,
                        error: e.to_string(),
                    }),
                }
            }
        }
    }
    let totals = totals(&rows);
    Ok(BatchReport {
        schema: SCHEMA_VERSION,
        rows,
        errors,
        totals,
        warnings,
    })
}

fn totals(rows: &[RunReport]) -> Totals {
    let mut t = Totals::default();
    let mut fpb_for_best = 0;
    let mut best = 0;
    for r in rows {
        t.fpb_dffs += r.fpb_dffs.unwrap_or(0);
        t.lp_dffs += r.lp_dffs.unwrap_or(0);
        t.ilp_dffs += r.ilp_dffs.unwrap_or(0);
        if let (Some(f), Some(b)) = (r.fpb_dffs, r.best_dffs()) {
            fpb_for_best += f;
            best += b;
        }
    }
    t.savings_percent = savings_percent(fpb_for_best, best);
    t
}
