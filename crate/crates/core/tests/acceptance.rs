// SPDX-License-Identifier: Apache-2.0

//! Acceptance run over the bundled benchmark suite.
//!
//! Prints one `PASS`/`FAIL` line per criterion followed by its evidence.
//! The process fails only when a criterion outside `KNOWN_GAPS` fails or a
//! known gap unexpectedly passes, so the list stays truthful both ways.
//!
//! Every ILP runs with a fixed branch-node budget so the run is
//! reproducible and finishes in minutes on one core.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfq_clocking::assignment::{check_clocking, shared_phase_wires};
use sfq_clocking::formulation::{min_feasible_dloop, Mode};
use sfq_clocking::pipeline::{run_ilp, run_lp, verify_design, Circuit, Design, IlpRun};
use sfq_clocking::report::{bench_files, load_circuit};
use sfq_clocking::simulator::{random_inputs, simulate_multiphase, SimConfig};
use sfq_clocking::solver::model::Sense;
use sfq_clocking::solver::{solve_lp, solve_model_ilp, solve_model_lp, IlpOptions, SolveStatus};

use common::{interpret, Small};

const TIME_LIMIT: Duration = Duration::from_secs(300);
const NODE_LIMIT: usize = 200;
const VECTORS: usize = 1000;

/// Criteria that this implementation does not meet; see the project notes
/// for the analysis of each.
const KNOWN_GAPS: &[u32] = &[2, 3, 5];

struct Outcome {
    id: u32,
    pass: bool,
    lines: Vec<String>,
}

struct Bench {
    name: String,
    circuit: Circuit,
}

impl Bench {
    fn sequential(&self) -> bool {
        self.circuit.netlist.num_registers() > 0
    }
}

/// ILP result together with the rounded LP it was warm-started from.
struct Solved {
    d_loop: u32,
    lp: Design,
    ilp: IlpRun,
}

impl Solved {
    fn dffs(&self) -> usize {
        self.ilp.design.as_ref().expect("warm-started ILP keeps an incumbent").dff_count
    }
}

fn solve(b: &Bench, mode: Mode, n: u32, warm: bool) -> Solved {
    let inst = b.circuit.formulate(mode, n, None).unwrap();
    let lp = run_lp(&b.circuit, &inst).unwrap().design;
    let ilp = run_ilp(&b.circuit, &inst, TIME_LIMIT, Some(NODE_LIMIT), warm.then_some(&lp.depths)).unwrap();
    Solved { d_loop: inst.d_loop(), lp, ilp }
}

fn load_suite() -> Vec<Bench> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("benchmarks");
    bench_files(&dir)
        .unwrap()
        .iter()
        .map(|p| {
            let circuit = load_circuit(p).unwrap();
            Bench {
                name: circuit.netlist.name.clone(),
                circuit,
            }
        })
        .collect()
}

fn modes_for(n: u32) -> Vec<Mode> {
    match n {
        1 => vec![Mode::Fpb, Mode::Baseline, Mode::Fanout],
        _ => vec![Mode::Baseline, Mode::Fanout, Mode::HoldSafe],
    }
}

fn feasibility(suite: &[Bench]) -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut checked = 0;
    for b in suite {
        for n in 1..=4 {
            for mode in modes_for(n) {
                let inst = b.circuit.formulate(mode, n, None).unwrap();
                let design = run_lp(&b.circuit, &inst).unwrap().design;
                let mut problems = Vec::new();
                if let Err(e) = inst.check_depths(&design.depths) {
                    problems.push(format!("constraints: {e}"));
                }
                if let Err(e) = check_clocking(&design.annotated) {
                    problems.push(format!("clocking: {e}"));
                }
                let cfg = SimConfig {
                    vectors_per_thread: VECTORS,
                    ..SimConfig::default()
                };
                let r = verify_design(&b.circuit, &design, &cfg).unwrap();
                if !r.pass || r.threads as u32 != inst.threads() {
                    problems.push(format!("simulation: {r}"));
                }
                if !problems.is_empty() {
                    lines.push(format!("{} {mode} N={n}: {}", b.name, problems.join("; ")));
                }
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = lines.is_empty() && elapsed < Duration::from_secs(30 * 60);
    lines.insert(
        0,
        format!(
            "{checked} configurations, {VECTORS} vectors per thread, {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
    Outcome { id: 1, pass, lines }
}

type Table = BTreeMap<(String, Mode, u32), Solved>;

fn solve_all(suite: &[Bench]) -> (Table, Table) {
    let mut warm = Table::new();
    let mut cold = Table::new();
    for b in suite {
        let key = |m, n| (b.name.clone(), m, n);
        warm.insert(key(Mode::Fpb, 1), solve(b, Mode::Fpb, 1, true));
        warm.insert(key(Mode::Baseline, 1), solve(b, Mode::Baseline, 1, true));
        for n in 2..=4 {
            for mode in [Mode::Baseline, Mode::Fanout, Mode::HoldSafe] {
                warm.insert(key(mode, n), solve(b, mode, n, true));
            }
            cold.insert(key(Mode::Baseline, n), solve(b, Mode::Baseline, n, false));
        }
    }
    (warm, cold)
}

fn lp_ilp_gap(warm: &Table) -> Outcome {
    let mut lines = Vec::new();
    let mut proven = 0;
    let mut worst = 1.0f64;
    for ((name, mode, n), s) in warm {
        if *n < 2 || !matches!(mode, Mode::Baseline | Mode::Fanout) || s.ilp.solution.status != SolveStatus::Optimal {
            continue;
        }
        proven += 1;
        let ilp = s.dffs();
        let ratio = if ilp == 0 {
            if s.lp.dff_count == 0 { 1.0 } else { f64::INFINITY }
        } else {
            s.lp.dff_count as f64 / ilp as f64
        };
        worst = worst.max(ratio);
        if ratio > 1.10 {
            lines.push(format!("{name} {mode} N={n}: rounded LP {} vs ILP {ilp} ({ratio:.3})", s.lp.dff_count));
        }
    }
    let pass = lines.is_empty();
    lines.insert(0, format!("{proven} instances proven optimal, worst ratio {worst:.3}"));
    Outcome { id: 2, pass, lines }
}

fn monotonicity(suite: &[Bench], warm: &Table) -> Outcome {
    let mut lines = Vec::new();
    let (mut fpb_total, mut two_total) = (0usize, 0usize);
    for b in suite {
        let c = |m, n| warm[&(b.name.clone(), m, n)].dffs();
        let counts = [c(Mode::Fpb, 1), c(Mode::Baseline, 2), c(Mode::Baseline, 3), c(Mode::Baseline, 4)];
        if counts.windows(2).any(|w| w[0] < w[1]) {
            lines.push(format!("{}: FPB/2/3/4 = {counts:?}", b.name));
        }
        fpb_total += counts[0];
        two_total += counts[1];
    }
    let savings = 100.0 * (1.0 - two_total as f64 / fpb_total as f64);
    let fanout_total: usize = suite.iter().map(|b| warm[&(b.name.clone(), Mode::Fanout, 2)].dffs()).sum();
    let fanout_savings = 100.0 * (1.0 - fanout_total as f64 / fpb_total as f64);
    let pass = lines.is_empty() && savings >= 60.0;
    lines.insert(
        0,
        format!(
            "FPB {fpb_total} DFFs, 2-phase {two_total} ({savings:.1}% savings, need 60%), \
             2-phase with fanout sharing {fanout_total} ({fanout_savings:.1}%)"
        ),
    );
    Outcome { id: 3, pass, lines }
}

fn fanout_benefit(suite: &[Bench], warm: &Table) -> Outcome {
    let mut lines = Vec::new();
    let (mut base2, mut fan2) = (0usize, 0usize);
    for b in suite {
        for n in 2..=4 {
            let base = warm[&(b.name.clone(), Mode::Baseline, n)].dffs();
            let fan = warm[&(b.name.clone(), Mode::Fanout, n)].dffs();
            if fan > base {
                lines.push(format!("{} N={n}: fanout {fan} > baseline {base}", b.name));
            }
            if n == 2 {
                base2 += base;
                fan2 += fan;
            }
        }
    }
    let extra = 100.0 * (base2 as f64 - fan2 as f64) / base2 as f64;
    let pass = lines.is_empty() && extra >= 5.0;
    lines.insert(0, format!("N=2: baseline {base2}, fanout {fan2}, additional savings {extra:.1}%"));
    Outcome { id: 4, pass, lines }
}

fn hold_safe_equivalence(suite: &[Bench], warm: &Table) -> Outcome {
    let mut lines = Vec::new();
    let mut compared = 0;
    for b in suite {
        for n in 2..=4 {
            let hs = &warm[&(b.name.clone(), Mode::HoldSafe, n)];
            let base = &warm[&(b.name.clone(), Mode::Baseline, n - 1)];
            let ok = if b.sequential() { hs.dffs() >= base.dffs() } else { hs.dffs() == base.dffs() };
            if !ok {
                lines.push(format!(
                    "{} N={n}: hold-safe {} ({:?}, d_loop {}), baseline N={} {} ({:?}, d_loop {})",
                    b.name,
                    hs.dffs(),
                    hs.ilp.solution.status,
                    hs.d_loop,
                    n - 1,
                    base.dffs(),
                    base.ilp.solution.status,
                    base.d_loop
                ));
            }
            compared += 1;
        }
    }
    let pass = lines.is_empty();
    lines.insert(0, format!("{compared} pairs compared"));
    Outcome { id: 5, pass, lines }
}

fn hold_safe_structure(suite: &[Bench], warm: &Table) -> Outcome {
    let mut lines = Vec::new();
    let mut netlists = 0;
    for b in suite {
        for n in 2..=4 {
            let s = &warm[&(b.name.clone(), Mode::HoldSafe, n)];
            for d in std::iter::once(&s.lp).chain(s.ilp.design.as_ref()) {
                let shared = shared_phase_wires(&d.annotated).unwrap();
                if !shared.is_empty() {
                    lines.push(format!("{} N={n}: {} wires share a phase, e.g. {:?}", b.name, shared.len(), shared[0]));
                }
                netlists += 1;
            }
        }
    }
    let pass = lines.is_empty();
    lines.insert(0, format!("{netlists} hold-safe netlists checked"));
    Outcome { id: 6, pass, lines }
}

fn random_small(rng: &mut ChaCha8Rng) -> Small {
    let n = rng.gen_range(1..=6);
    let rows = (0..rng.gen_range(0..=4))
        .map(|_| {
            let coef = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
            (coef, sense, rng.gen_range(-6..=12))
        })
        .collect();
    Small {
        upper: (0..n).map(|_| rng.gen_range(0..=8)).collect(),
        cost: (0..n).map(|_| rng.gen_range(-5..=5)).collect(),
        rows,
    }
}

fn solver_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut lines = Vec::new();
    let mut feasible = 0;
    for i in 0..200 {
        let s = random_small(&mut rng);
        let m = s.to_model();
        let ilp = solve_model_ilp(&m, &IlpOptions::default()).unwrap();
        let lp = solve_model_lp(&m).unwrap();
        match s.brute_force() {
            None if ilp.status != SolveStatus::Infeasible => {
                lines.push(format!("instance {i}: infeasible but solver says {:?}", ilp.status));
            }
            None => {}
            Some(best) => {
                feasible += 1;
                if ilp.status != SolveStatus::Optimal || (ilp.objective - best as f64).abs() > 1e-6 {
                    lines.push(format!("instance {i}: ILP {:?} {} vs enumeration {best}", ilp.status, ilp.objective));
                }
                if lp.objective > ilp.objective + 1e-6 {
                    lines.push(format!("instance {i}: LP {} above ILP {}", lp.objective, ilp.objective));
                }
            }
        }
    }
    let pass = lines.is_empty();
    lines.insert(0, format!("200 instances, {feasible} feasible"));
    Outcome { id: 7, pass, lines }
}

fn warm_start(warm: &Table, cold: &Table) -> Outcome {
    let mut lines = Vec::new();
    let mut fewer = 0;
    let mut both_capped = 0;
    for (key, c) in cold {
        let w = &warm[key];
        let (wn, cn) = (w.ilp.solution.stats.branch_nodes, c.ilp.solution.stats.branch_nodes);
        if wn <= cn {
            fewer += 1;
        }
        if wn == NODE_LIMIT && cn == NODE_LIMIT {
            both_capped += 1;
        }
        if c.ilp.solution.has_values() && w.ilp.solution.objective > c.ilp.solution.objective + 1e-6 {
            lines.push(format!(
                "{} N={}: warm objective {} worse than cold {}",
                key.0, key.2, w.ilp.solution.objective, c.ilp.solution.objective
            ));
        }
    }
    let share = fewer as f64 / cold.len() as f64;
    let pass = lines.is_empty() && share >= 0.9;
    lines.insert(
        0,
        format!(
            "warm start used no more nodes on {fewer}/{} instances ({:.0}%), {both_capped} hit the node budget either way",
            cold.len(),
            share * 100.0
        ),
    );
    Outcome { id: 8, pass, lines }
}

fn scalability(suite: &[Bench]) -> Outcome {
    let Some(b) = suite.iter().max_by_key(|b| b.circuit.netlist.num_gates()) else {
        return Outcome { id: 9, pass: false, lines: vec!["empty suite".into()] };
    };
    let gates = b.circuit.netlist.num_gates();
    let inst = b.circuit.formulate(Mode::Baseline, 2, None).unwrap();
    let start = Instant::now();
    let lp = solve_lp(&inst).unwrap();
    let elapsed = start.elapsed();
    let pass = gates >= 2000 && lp.status == SolveStatus::Optimal && elapsed < Duration::from_secs(60);
    Outcome {
        id: 9,
        pass,
        lines: vec![format!(
            "{} ({gates} gates, {} rows): LP {:?} in {:.2} s",
            b.name,
            inst.num_constraints(),
            lp.status,
            elapsed.as_secs_f64()
        )],
    }
}

fn thread_correctness(suite: &[Bench]) -> Outcome {
    let mut lines = Vec::new();
    let mut runs = 0;
    for b in suite.iter().filter(|b| b.sequential()) {
        let loop_depth = min_feasible_dloop(&b.circuit.dag, 1);
        for t in [1u32, 2, 4] {
            let n = loop_depth.div_ceil(t).max(1);
            let inst = b.circuit.formulate(Mode::Baseline, n, Some(t * n)).unwrap();
            let design = run_lp(&b.circuit, &inst).unwrap().design;
            assert_eq!(design.annotated.threads(), t);
            let inputs = random_inputs(b.circuit.netlist.inputs.len(), t as usize, 200, 10 + t as u64);
            let cfg = SimConfig {
                vectors_per_thread: 200,
                ..SimConfig::default()
            };
            let trace = simulate_multiphase(&design.annotated, &inputs, &cfg).unwrap();
            runs += 1;
            if !trace.violations.is_empty() {
                lines.push(format!("{} T={t} N={n}: {}", b.name, trace.violations[0]));
                continue;
            }
            for (th, stream) in inputs.iter().enumerate() {
                let golden = interpret(&b.circuit.netlist, stream);
                if golden.iter().enumerate().any(|(k, g)| &trace.outputs[k][th] != g) {
                    lines.push(format!("{} T={t} N={n}: thread {th} differs from its golden run", b.name));
                }
            }
        }
    }
    let pass = lines.is_empty() && runs > 0;
    lines.insert(0, format!("{runs} multi-thread runs on sequential benchmarks"));
    Outcome { id: 10, pass, lines }
}

fn main() {
    // Accept and ignore libtest arguments such as `--nocapture`.
    let start = Instant::now();
    let suite = load_suite();
    let gates: usize = suite.iter().map(|b| b.circuit.netlist.num_gates()).sum();
    println!("acceptance: {} benchmarks, {gates} gates, ILP node budget {NODE_LIMIT}", suite.len());

    let mut outcomes = vec![feasibility(&suite)];
    let (warm, cold) = solve_all(&suite);
    outcomes.push(lp_ilp_gap(&warm));
    outcomes.push(monotonicity(&suite, &warm));
    outcomes.push(fanout_benefit(&suite, &warm));
    outcomes.push(hold_safe_equivalence(&suite, &warm));
    outcomes.push(hold_safe_structure(&suite, &warm));
    outcomes.push(solver_correctness());
    outcomes.push(warm_start(&warm, &cold));
    outcomes.push(scalability(&suite));
    outcomes.push(thread_correctness(&suite));

    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = KNOWN_GAPS.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known gap)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as a known gap)",
        };
        println!("criterion {:>2}: {tag}: {}", o.id, o.lines[0]);
        for line in &o.lines[1..] {
            println!("    {line}");
        }
        if o.pass == known {
            unexpected.push(o.id);
        }
    }
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
