// SPDX-License-Identifier: Apache-2.0

//! Command-line driver behind the `sfq-clock` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, ValueEnum};

use crate::bench::emit_bench;
use crate::formulation::Mode;
use crate::pipeline::FlowError;
use crate::report::{batch_report, load_circuit, run, RunOptions, SolverChoice};
use crate::simulator::{SimConfig, DEFAULT_SEED};
use crate::solver::{export_lp_format, SolveStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_NO_SOLUTION: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fpb,
    Baseline,
    Fanout,
    Holdsafe,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Fpb => Mode::Fpb,
            ModeArg::Baseline => Mode::Baseline,
            ModeArg::Fanout => Mode::Fanout,
            ModeArg::Holdsafe => Mode::HoldSafe,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Lp,
    Ilp,
    Both,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> SolverChoice {
        match s {
            SolverArg::Lp => SolverChoice::Lp,
            SolverArg::Ilp => SolverChoice::Ilp,
            SolverArg::Both => SolverChoice::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Multi-phase clock assignment and path-balancing DFF insertion for SFQ
/// netlists.
#[derive(Debug, Parser)]
#[command(name = "sfq-clock", version)]
pub struct Args {
    /// Netlist in ISCAS .bench format.
    #[arg(long, required_unless_present = "batch", conflicts_with = "batch")]
    pub input: Option<PathBuf>,
    /// Run every .bench file of a directory and print a comparison table.
    #[arg(long, value_name = "DIR")]
    pub batch: Option<PathBuf>,
    /// Number of clock phases N. Defaults to 2, or 1 in fpb mode.
    #[arg(long)]
    pub phases: Option<u32>,
    /// Phase span of register loops; a multiple of N. Defaults to the
    /// smallest feasible multiple.
    #[arg(long)]
    pub dloop: Option<u32>,
    #[arg(long, value_enum, default_value = "baseline")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "both")]
    pub solver: SolverArg,
    /// ILP time limit in seconds.
    #[arg(long, default_value_t = 3000.0)]
    pub time_limit: f64,
    /// Cap on ILP branch nodes, for reproducible runs.
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Do not seed the ILP with the rounded LP solution.
    #[arg(long)]
    pub cold_start: bool,
    /// Simulate the result against the original netlist.
    #[arg(long)]
    pub verify: bool,
    /// Random vectors per thread for --verify.
    #[arg(long, default_value_t = 1000)]
    pub vectors: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the clocked netlist.
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
    /// Write the optimization problem in LP file format.
    #[arg(long, value_name = "FILE")]
    pub export_lp: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub report: ReportFormat,
    /// Write the report to a file instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub report_file: Option<PathBuf>,
    /// Write the optimization graph in DOT format.
    #[arg(long, value_name = "FILE")]
    pub dump_dot: Option<PathBuf>,
    /// Write a value-change dump of the verification run. Implies --verify.
    #[arg(long, value_name = "FILE")]
    pub dump_vcd: Option<PathBuf>,
    /// Leave wall times out of reports so reruns are byte-identical.
    #[arg(long)]
    pub omit_timings: bool,
    /// Phase counts for --batch.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub batch_phases: Vec<u32>,
    /// Modes for --batch.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "baseline")]
    pub batch_modes: Vec<ModeArg>,
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        let code = match e {
            FlowError::Parse(_) | FlowError::Dag(_) => EXIT_PARSE,
            FlowError::Formulation(_) => EXIT_USAGE,
            FlowError::NoSolution => EXIT_NO_SOLUTION,
            _ => EXIT_FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

/// Files written so far; removed again if the run fails.
#[derive(Default)]
struct Artifacts(Vec<PathBuf>);

impl Artifacts {
    fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        std::fs::write(path, contents)
            .map_err(|e| CliError::new(EXIT_FAILURE, format!("io error: {}: {e}", path.display())))?;
        self.0.push(path.to_path_buf());
        Ok(())
    }

    fn remove_all(&self) {
        for p in &self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

fn options(args: &Args) -> Result<RunOptions, CliError> {
    if !(args.time_limit.is_finite() && args.time_limit > 0.0) {
        return Err(CliError::new(EXIT_USAGE, "parameter error: --time-limit must be positive"));
    }
    let mode: Mode = args.mode.into();
    let n_phases = args
        .phases
        .unwrap_or(if mode == Mode::Fpb { 1 } else { 2 });
    let verify = (args.verify || args.dump_vcd.is_some()).then(|| SimConfig {
        vectors_per_thread: args.vectors.max(1),
        seed: args.seed,
        record_vcd: args.dump_vcd.is_some(),
        ..SimConfig::default()
    });
    Ok(RunOptions {
        mode,
        n_phases,
        d_loop: args.dloop,
        solver: args.solver.into(),
        time_limit: Duration::from_secs_f64(args.time_limit),
        node_limit: args.node_limit,
        warm_start: !args.cold_start,
        verify,
        omit_timings: args.omit_timings,
    })
}

fn emit_report(args: &Args, text: &str, artifacts: &mut Artifacts, out: &mut dyn Write) -> Result<(), CliError> {
    match &args.report_file {
        Some(path) => artifacts.write(path, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::new(EXIT_FAILURE, format!("io error: {e}"))),
    }
}

fn run_single(args: &Args, input: &Path, artifacts: &mut Artifacts, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = options(args)?;
    let circuit = load_circuit(input)?;
    if let Some(path) = &args.dump_dot {
        artifacts.write(path, &circuit.dag.to_dot())?;
    }
    let inst = circuit.formulate(opts.mode, opts.n_phases, opts.d_loop)?;
    if let Some(path) = &args.export_lp {
        artifacts.write(path, &export_lp_format(inst.model(), opts.solver.ilp()))?;
    }
    let mut opts = opts;
    let vcd_wanted = args.dump_vcd.is_some();
    if let Some(cfg) = opts.verify.as_mut() {
        cfg.record_vcd = false;
    }
    let outcome = run(&circuit, &opts)?;

    let design = outcome.best_design();
    if let (Some(path), Some(d)) = (&args.emit, design) {
        artifacts.write(path, &emit_bench(&d.annotated))?;
    }
    if let (true, Some(d), Some(cfg)) = (vcd_wanted, design, opts.verify.as_ref()) {
        let cfg = SimConfig {
            record_vcd: true,
            ..cfg.clone()
        };
        let r = crate::pipeline::verify_design(&circuit, d, &cfg)?;
        artifacts.write(args.dump_vcd.as_ref().unwrap(), r.vcd.as_deref().unwrap_or_default())?;
    }

    let report = &outcome.report;
    let text = match args.report {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    emit_report(args, &text, artifacts, out)?;

    if report.ilp_status == Some(SolveStatus::NoSolution) {
        return Err(CliError::new(EXIT_NO_SOLUTION, "ILP found no solution within its limits"));
    }
    if args.verify && !report.verified() {
        return Err(CliError::new(EXIT_VERIFY, "verification failed"));
    }
    Ok(())
}

fn run_batch(args: &Args, dir: &Path, artifacts: &mut Artifacts, out: &mut dyn Write) -> Result<(), CliError> {
    let base = options(args)?;
    let modes: Vec<Mode> = args.batch_modes.iter().map(|&m| m.into()).collect();
    let report = batch_report(dir, &args.batch_phases, &modes, &base)
        .map_err(|e| CliError::new(EXIT_FAILURE, format!("io error: {}: {e}", dir.display())))?;
    let text = match args.report {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    emit_report(args, &text, artifacts, out)?;
    if args.verify && report.rows.iter().any(|r| !r.verified()) {
        return Err(CliError::new(EXIT_VERIFY, "verification failed"));
    }
    Ok(())
}

/// Parses `argv` and runs; returns the process exit code.
pub fn main_with(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            // --help and --version also arrive here.
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let mut artifacts = Artifacts::default();
    let result = match (&args.batch, &args.input) {
        (Some(dir), _) => run_batch(&args, dir, &mut artifacts, out),
        (None, Some(input)) => run_single(&args, input, &mut artifacts, out),
        (None, None) => Err(CliError::new(EXIT_USAGE, "--input is required")),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            // Reports of failed verification and ILP runs stay for inspection.
            if e.code != EXIT_VERIFY && e.code != EXIT_NO_SOLUTION {
                artifacts.remove_all();
            }
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
