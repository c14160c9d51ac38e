// SPDX-License-Identifier: Apache-2.0

//! Phase-slot simulation of clocked netlists and a synchronous reference.
//!
//! Time advances in slots; slot `t` belongs to phase `(t mod N) + 1`. In a
//! slot every element on that phase first consumes the tokens latched at
//! its fanins, then all of them deliver their results to their fanout
//! latches. A token is either a bit or empty; elements firing before the
//! first wave reaches them see only empty latches and emit nothing.
//!
//! Wave `w` enters the primary inputs in clock cycle `w` and belongs to
//! thread `w mod T`. A register passes the token it latched on to the next
//! wave of the same thread, `T` waves later; the first `T` waves read the
//! initial register state instead.

use std::fmt::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assignment::stage_of;
use crate::bench::{AnnotatedNetlist, Element, Netlist, Op};
use crate::dag::{build_dag, DagError, NodeKind};

/// Default PRNG seed for input vectors.
pub const DEFAULT_SEED: u64 = 0x5eed_c10c;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub vectors_per_thread: usize,
    pub seed: u64,
    /// Cycles of zero vectors injected after the data so the pipeline
    /// drains. `None` uses `ceil(D_outputs / N) + T`.
    pub warmup_cycles: Option<usize>,
    /// Initial register state.
    pub register_init: bool,
    /// Record a value-change dump of every element.
    pub record_vcd: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            vectors_per_thread: 1000,
            seed: DEFAULT_SEED,
            warmup_cycles: None,
            register_init: false,
            record_vcd: false,
        }
    }
}

/// Input streams, indexed `[thread][vector][input]`.
pub type ThreadInputs = Vec<Vec<Vec<bool>>>;

/// Uniformly random input vectors for each thread.
pub fn random_inputs(num_inputs: usize, threads: usize, vectors: usize, seed: u64) -> ThreadInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..threads)
        .map(|_| {
            (0..vectors)
                .map(|_| (0..num_inputs).map(|_| rng.gen()).collect())
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// A multi-fanin element fired with some but not all fanins latched.
    PartialFanin { latched: usize, fanins: usize },
    /// A latch was written again before its sink consumed it.
    DoubleWrite { driver: String },
    /// Tokens arrived one or more waves off: present before the element's
    /// first data wave, or missing after it.
    WaveSkew { wave: i64, early: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub slot: u64,
    pub element: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::PartialFanin { latched, fanins } => write!(
                f,
                "slot {}: {} fired with {latched} of {fanins} fanins latched",
                self.slot, self.element
            ),
            ViolationKind::DoubleWrite { driver } => write!(
                f,
                "slot {}: {driver} overwrote an unread token at {}",
                self.slot, self.element
            ),
            ViolationKind::WaveSkew { wave, early } => write!(
                f,
                "slot {}: {} fired for wave {wave} {}",
                self.slot,
                self.element,
                if *early { "with an early token" } else { "without a token" }
            ),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Trace {
    /// Bit streams indexed `[output][thread][vector]`.
    pub outputs: Vec<Vec<Vec<bool>>>,
    /// Non-empty only for invalid clockings; the run stops at the first one.
    pub violations: Vec<Violation>,
    pub slots: u64,
    pub vcd: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Input(usize),
    Logic(Op),
    /// Register of the source circuit.
    Register,
    Output(usize),
}

struct SimElement {
    name: String,
    kind: Kind,
    /// Stage of the element; its `k`-th firing carries wave `k - (stage - 1)`.
    stage: i64,
    fanin: std::ops::Range<usize>,
    fanout: Vec<usize>,
    fires: i64,
}

/// Errors that stop a simulation before it runs.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SimError {
    #[error("{0} has no clocking label")]
    Unlabeled(String),
    #[error("net `{0}` has no driver")]
    Undriven(String),
    #[error("expected {expected} input streams (one per thread), got {got}")]
    ThreadCount { expected: usize, got: usize },
    #[error("thread {thread} vector {vector} has {got} bits, expected {expected}")]
    VectorWidth {
        thread: usize,
        vector: usize,
        got: usize,
        expected: usize,
    },
    #[error("threads carry different numbers of vectors")]
    RaggedThreads,
    #[error(transparent)]
    Dag(#[from] DagError),
}

struct Compiled {
    elements: Vec<SimElement>,
    /// Sink element of each latch.
    latch_sink: Vec<usize>,
    by_phase: Vec<Vec<usize>>,
}

fn compile(a: &AnnotatedNetlist) -> Result<Compiled, SimError> {
    let n = a.n_phases;
    let label = |e: &Element, name: &str| -> Result<(u32, i64), SimError> {
        match (a.phase(e), a.depth(e)) {
            (Some(p), Some(d)) => Ok((p, d)),
            _ => Err(SimError::Unlabeled(name.to_string())),
        }
    };
    let net = &a.netlist;
    let mut elements = Vec::new();
    let mut phases = Vec::new();
    let mut element_of_net = std::collections::HashMap::new();
    for (i, name) in net.inputs.iter().enumerate() {
        let (p, d) = label(&Element::Net(name.clone()), name)?;
        element_of_net.insert(name.as_str(), elements.len());
        phases.push(p);
        elements.push(SimElement {
            name: name.clone(),
            kind: Kind::Input(i),
            stage: stage_of(d, n),
            fanin: 0..0,
            fanout: Vec::new(),
            fires: 0,
        });
    }
    for c in &net.cells {
        let (p, d) = label(&Element::Net(c.output.clone()), &c.output)?;
        let stage = stage_of(d, n);
        let kind = if a.is_register(c) {
            Kind::Register
        } else {
            Kind::Logic(c.op)
        };
        element_of_net.insert(c.output.as_str(), elements.len());
        phases.push(p);
        elements.push(SimElement {
            name: c.output.clone(),
            kind,
            stage,
            fanin: 0..0,
            fanout: Vec::new(),
            fires: 0,
        });
    }
    let first_output = elements.len();
    for (k, o) in net.outputs.iter().enumerate() {
        let name = format!("output {o}");
        let (p, d) = label(&Element::Output(k), &name)?;
        phases.push(p);
        elements.push(SimElement {
            name,
            kind: Kind::Output(k),
            stage: stage_of(d, n),
            fanin: 0..0,
            fanout: Vec::new(),
            fires: 0,
        });
    }

    // One latch per fanin slot.
    let mut latch_sink = Vec::new();
    let sinks = net
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| (net.inputs.len() + i, c.fanins.clone()))
        .chain(
            net.outputs
                .iter()
                .enumerate()
                .map(|(k, o)| (first_output + k, vec![o.clone()])),
        );
    for (sink, fanins) in sinks {
        let start = latch_sink.len();
        for f in &fanins {
            let &driver = element_of_net
                .get(f.as_str())
                .ok_or_else(|| SimError::Undriven(f.clone()))?;
            elements[driver].fanout.push(latch_sink.len());
            latch_sink.push(sink);
        }
        elements[sink].fanin = start..latch_sink.len();
    }

    let mut by_phase = vec![Vec::new(); n as usize];
    for (i, &p) in phases.iter().enumerate() {
        by_phase[(p.clamp(1, n) - 1) as usize].push(i);
    }
    Ok(Compiled {
        elements,
        latch_sink,
        by_phase,
    })
}

struct Vcd {
    text: String,
    last: Vec<Option<Option<bool>>>,
}

impl Vcd {
    fn new(elements: &[SimElement]) -> Self {
        let mut text = String::from("$timescale 1ns $end\n$scope module top $end\n");
        for (i, e) in elements.iter().enumerate() {
            let name: String = e
                .name
                .chars()
                .map(|c| if c.is_whitespace() { '_' } else { c })
                .collect();
            let _ = writeln!(text, "$var wire 1 e{i} {name} $end");
        }
        text.push_str("$upscope $end\n$enddefinitions $end\n");
        Vcd {
            text,
            last: vec![None; elements.len()],
        }
    }

    fn record(&mut self, slot: u64, changes: &[(usize, Option<bool>)]) {
        let mut stamped = false;
        for &(i, tok) in changes {
            if self.last[i] == Some(tok) {
                continue;
            }
            if !stamped {
                let _ = writeln!(self.text, "#{slot}");
                stamped = true;
            }
            let v = match tok {
                None => 'x',
                Some(true) => '1',
                Some(false) => '0',
            };
            let _ = writeln!(self.text, "{v}e{i}");
            self.last[i] = Some(tok);
        }
    }
}

/// Simulates `a` on the given per-thread input streams.
pub fn simulate_multiphase(
    a: &AnnotatedNetlist,
    inputs: &ThreadInputs,
    cfg: &SimConfig,
) -> Result<Trace, SimError> {
    let n = a.n_phases as u64;
    let threads = a.threads() as usize;
    if inputs.len() != threads {
        return Err(SimError::ThreadCount {
            expected: threads,
            got: inputs.len(),
        });
    }
    let vectors = inputs.first().map_or(0, Vec::len);
    if inputs.iter().any(|t| t.len() != vectors) {
        return Err(SimError::RaggedThreads);
    }
    let width = a.netlist.inputs.len();
    for (t, stream) in inputs.iter().enumerate() {
        if let Some((v, vec)) = stream.iter().enumerate().find(|(_, v)| v.len() != width) {
            return Err(SimError::VectorWidth {
                thread: t,
                vector: v,
                got: vec.len(),
                expected: width,
            });
        }
    }

    let Compiled {
        mut elements,
        latch_sink,
        by_phase,
    } = compile(a)?;
    let num_outputs = a.netlist.outputs.len();
    let out_depth = (0..num_outputs)
        .filter_map(|k| a.depth(&Element::Output(k)))
        .max()
        .unwrap_or(1);
    let drain = cfg
        .warmup_cycles
        .unwrap_or(stage_of(out_depth, a.n_phases) as usize + threads);
    let data_waves = (threads * vectors) as i64;
    let total_waves = data_waves + drain as i64;

    let mut latches: Vec<Option<bool>> = vec![None; latch_sink.len()];
    let mut waves_out: Vec<Vec<bool>> = vec![Vec::new(); num_outputs];
    let mut violations = Vec::new();
    let mut vcd = cfg.record_vcd.then(|| Vcd::new(&elements));
    let mut emitted: Vec<(usize, Option<bool>)> = Vec::new();
    let mut scratch = Vec::new();

    // The last output for wave `total_waves - 1` fires in its stage.
    let last_slot = (total_waves as u64 + stage_of(out_depth, a.n_phases) as u64) * n;
    let mut slot = 0u64;
    'run: while slot < last_slot {
        let group = &by_phase[(slot % n) as usize];
        emitted.clear();
        for &ei in group {
            let e = &mut elements[ei];
            let k = e.fires;
            e.fires += 1;
            let wave = k - (e.stage - 1);
            scratch.clear();
            let mut latched = 0;
            for l in e.fanin.clone() {
                if let Some(v) = latches[l].take() {
                    latched += 1;
                    scratch.push(v);
                }
            }
            let fanins = e.fanin.len();
            if latched != 0 && latched != fanins {
                violations.push(Violation {
                    slot,
                    element: e.name.clone(),
                    kind: ViolationKind::PartialFanin { latched, fanins },
                });
                break 'run;
            }
            // Source registers take their initial state for the first
            // `threads` waves; everything else expects data from wave 0.
            let first_data = if matches!(e.kind, Kind::Register) { threads as i64 } else { 0 };
            if fanins > 0 && (latched > 0) != (wave >= first_data) {
                violations.push(Violation {
                    slot,
                    element: e.name.clone(),
                    kind: ViolationKind::WaveSkew {
                        wave,
                        early: latched > 0,
                    },
                });
                break 'run;
            }
            let token = match e.kind {
                Kind::Input(i) => {
                    if wave < 0 {
                        None
                    } else if wave < data_waves {
                        let w = wave as usize;
                        Some(inputs[w % threads][w / threads][i])
                    } else {
                        Some(false)
                    }
                }
                Kind::Logic(op) => (latched == fanins).then(|| op.eval(&scratch)),
                Kind::Register => {
                    if latched > 0 {
                        Some(scratch[0])
                    } else if wave >= 0 && wave < threads as i64 {
                        Some(cfg.register_init)
                    } else {
                        None
                    }
                }
                Kind::Output(k) => {
                    if latched > 0 {
                        waves_out[k].push(scratch[0]);
                    }
                    None
                }
            };
            if matches!(e.kind, Kind::Output(_)) {
                emitted.push((ei, scratch.first().copied()));
            } else {
                emitted.push((ei, token));
            }
        }
        for &(ei, token) in &emitted {
            let Some(v) = token else { continue };
            if matches!(elements[ei].kind, Kind::Output(_)) {
                continue;
            }
            for &l in &elements[ei].fanout {
                if latches[l].is_some() {
                    violations.push(Violation {
                        slot,
                        element: elements[latch_sink[l]].name.clone(),
                        kind: ViolationKind::DoubleWrite {
                            driver: elements[ei].name.clone(),
                        },
                    });
                    break 'run;
                }
                latches[l] = Some(v);
            }
        }
        if let Some(vcd) = vcd.as_mut() {
            vcd.record(slot, &emitted);
        }
        slot += 1;
    }

    let outputs = waves_out
        .into_iter()
        .map(|stream| {
            let mut per_thread = vec![Vec::with_capacity(vectors); threads];
            for (w, bit) in stream.into_iter().take(threads * vectors).enumerate() {
                per_thread[w % threads].push(bit);
            }
            per_thread
        })
        .collect();
    Ok(Trace {
        outputs,
        violations,
        slots: slot,
        vcd: vcd.map(|v| v.text),
    })
}

/// Synchronous reference: combinational cells evaluated in topological
/// order each step, registers updated once per step from `init`.
/// Returns one bit stream per output.
pub fn simulate_golden_with_init(
    netlist: &Netlist,
    vectors: &[Vec<bool>],
    init: bool,
) -> Result<Vec<Vec<bool>>, SimError> {
    let dag = build_dag(netlist)?;
    let first_cell = netlist.inputs.len();
    let num_nets = first_cell + netlist.cells.len();
    let net_index: std::collections::HashMap<&str, usize> = netlist
        .inputs
        .iter()
        .chain(netlist.cells.iter().map(|c| &c.output))
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let fanins: Vec<Vec<usize>> = netlist
        .cells
        .iter()
        .map(|c| c.fanins.iter().map(|f| net_index[f.as_str()]).collect())
        .collect();
    let gates: Vec<usize> = dag
        .topological_order()
        .iter()
        .filter(|&&v| matches!(dag.nodes[v].kind, NodeKind::Gate(_)))
        .map(|&v| v - first_cell)
        .collect();
    let registers: Vec<usize> = (0..netlist.cells.len())
        .filter(|&i| netlist.cells[i].op == Op::Dff)
        .collect();
    let outputs: Vec<usize> = netlist.outputs.iter().map(|o| net_index[o.as_str()]).collect();

    let mut value = vec![false; num_nets];
    for &r in &registers {
        value[first_cell + r] = init;
    }
    let mut streams = vec![Vec::with_capacity(vectors.len()); outputs.len()];
    let mut buf = Vec::new();
    for vec in vectors {
        value[..first_cell].copy_from_slice(vec);
        for &g in &gates {
            buf.clear();
            buf.extend(fanins[g].iter().map(|&f| value[f]));
            value[first_cell + g] = netlist.cells[g].op.eval(&buf);
        }
        for (s, &o) in streams.iter_mut().zip(&outputs) {
            s.push(value[o]);
        }
        let next: Vec<bool> = registers.iter().map(|&r| value[fanins[r][0]]).collect();
        for (&r, v) in registers.iter().zip(next) {
            value[first_cell + r] = v;
        }
    }
    Ok(streams)
}

pub fn simulate_golden(netlist: &Netlist, vectors: &[Vec<bool>]) -> Result<Vec<Vec<bool>>, SimError> {
    simulate_golden_with_init(netlist, vectors, false)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub thread: usize,
    pub output: String,
    /// Index of the first differing vector, or the stream length when the
    /// clocked stream came out short.
    pub vector: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub threads: usize,
    pub vectors_per_thread: usize,
    pub latency_cycles: i64,
    pub violations: Vec<Violation>,
    /// First divergence per (thread, output) pair.
    pub mismatches: Vec<Mismatch>,
    #[serde(skip)]
    pub vcd: Option<String>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            return write!(
                f,
                "pass ({} threads x {} vectors)",
                self.threads, self.vectors_per_thread
            );
        }
        write!(f, "FAIL")?;
        if let Some(v) = self.violations.first() {
            write!(f, ": {v}")?;
        }
        if let Some(m) = self.mismatches.first() {
            write!(
                f,
                ": thread {} output {} diverges at vector {} ({} mismatching streams)",
                m.thread,
                m.output,
                m.vector,
                self.mismatches.len()
            )?;
        }
        Ok(())
    }
}

/// Simulates `annotated` and `original` on the same seeded random streams
/// and compares every thread bit for bit.
pub fn verify(annotated: &AnnotatedNetlist, original: &Netlist, cfg: &SimConfig) -> Result<VerifyReport, SimError> {
    let threads = annotated.threads() as usize;
    let inputs = random_inputs(
        original.inputs.len(),
        threads,
        cfg.vectors_per_thread,
        cfg.seed,
    );
    verify_with_inputs(annotated, original, &inputs, cfg)
}

pub fn verify_with_inputs(
    annotated: &AnnotatedNetlist,
    original: &Netlist,
    inputs: &ThreadInputs,
    cfg: &SimConfig,
) -> Result<VerifyReport, SimError> {
    let trace = simulate_multiphase(annotated, inputs, cfg)?;
    let mut mismatches = Vec::new();
    if trace.violations.is_empty() {
        for (t, stream) in inputs.iter().enumerate() {
            let golden = simulate_golden_with_init(original, stream, cfg.register_init)?;
            for (k, expect) in golden.iter().enumerate() {
                let got = &trace.outputs[k][t];
                let first = expect
                    .iter()
                    .zip(got)
                    .position(|(a, b)| a != b)
                    .or((got.len() < expect.len()).then_some(got.len()));
                if let Some(vector) = first {
                    mismatches.push(Mismatch {
                        thread: t,
                        output: original.outputs[k].clone(),
                        vector,
                    });
                }
            }
        }
    }
    let out_depth = (0..annotated.netlist.outputs.len())
        .filter_map(|k| annotated.depth(&Element::Output(k)))
        .max()
        .unwrap_or(1);
    Ok(VerifyReport {
        pass: trace.violations.is_empty() && mismatches.is_empty(),
        threads: inputs.len(),
        vectors_per_thread: inputs.first().map_or(0, Vec::len),
        latency_cycles: stage_of(out_depth, annotated.n_phases) - 1,
        violations: trace.violations,
        mismatches,
        vcd: trace.vcd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;

    #[test]
    fn golden_register_delays_by_one() {
        let n = parse_bench("INPUT(a)\nOUTPUT(q)\nq = DFF(a)").unwrap();
        let v: Vec<Vec<bool>> = [true, false, true].iter().map(|&b| vec![b]).collect();
        assert_eq!(simulate_golden(&n, &v).unwrap(), vec![vec![false, true, false]]);
    }

    #[test]
    fn golden_and() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(c)\nc = AND(a, b)").unwrap();
        assert_eq!(simulate_golden(&n, &[vec![true, false]]).unwrap(), vec![vec![false]]);
        assert_eq!(simulate_golden(&n, &[vec![true, true]]).unwrap(), vec![vec![true]]);
    }

    #[test]
    fn random_inputs_are_seeded() {
        assert_eq!(random_inputs(3, 2, 5, 7), random_inputs(3, 2, 5, 7));
        assert_ne!(random_inputs(3, 2, 5, 7), random_inputs(3, 2, 5, 8));
    }
}
