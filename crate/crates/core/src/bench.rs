// SPDX-License-Identifier: Apache-2.0

//! IO for ISCAS `.bench` netlists.
//!
//! ```text
//! # comment
//! INPUT(a)
//! INPUT(b)
//! OUTPUT(q)
//! c = NAND(a, b)
//! q = DFF(c)
//! ```
//!
//! Annotated netlists carry their clocking in comment lines, so the emitted
//! text still loads in any `.bench` reader:
//!
//! ```text
//! # CLOCKING phases=2 dloop=2 holdsafe=0
//! # INSERTED c_pb1
//! # PHASE c 2
//! # DEPTH c 2
//! # OUTPUT_PHASE q 1
//! # OUTPUT_DEPTH q 3
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buff,
    Dff,
}

impl Op {
    pub const ALL: [Op; 9] = [
        Op::And,
        Op::Nand,
        Op::Or,
        Op::Nor,
        Op::Xor,
        Op::Xnor,
        Op::Not,
        Op::Buff,
        Op::Dff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::And => "AND",
            Op::Nand => "NAND",
            Op::Or => "OR",
            Op::Nor => "NOR",
            Op::Xor => "XOR",
            Op::Xnor => "XNOR",
            Op::Not => "NOT",
            Op::Buff => "BUFF",
            Op::Dff => "DFF",
        }
    }

    pub fn is_unary(self) -> bool {
        matches!(self, Op::Not | Op::Buff | Op::Dff)
    }

    /// Logic function of a combinational op. A `DFF` evaluates as a buffer.
    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            Op::And => inputs.iter().all(|&x| x),
            Op::Nand => !inputs.iter().all(|&x| x),
            Op::Or => inputs.iter().any(|&x| x),
            Op::Nor => !inputs.iter().any(|&x| x),
            Op::Xor => inputs.iter().fold(false, |a, &x| a ^ x),
            Op::Xnor => !inputs.iter().fold(false, |a, &x| a ^ x),
            Op::Not => !inputs[0],
            Op::Buff | Op::Dff => inputs[0],
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Op::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub output: String,
    pub op: Op,
    pub fanins: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Netlist {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub cells: Vec<Cell>,
}

/// Source of a net.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Cell(usize),
}

impl Netlist {
    /// Map from net name to its driver.
    pub fn drivers(&self) -> HashMap<&str, Driver> {
        let mut map = HashMap::with_capacity(self.inputs.len() + self.cells.len());
        for (i, n) in self.inputs.iter().enumerate() {
            map.insert(n.as_str(), Driver::Input(i));
        }
        for (i, c) in self.cells.iter().enumerate() {
            map.insert(c.output.as_str(), Driver::Cell(i));
        }
        map
    }

    pub fn num_registers(&self) -> usize {
        self.cells.iter().filter(|c| c.op == Op::Dff).count()
    }

    pub fn num_gates(&self) -> usize {
        self.cells.len() - self.num_registers()
    }

    pub fn is_sequential(&self) -> bool {
        self.num_registers() > 0
    }

    /// Checks the structural invariants that [`parse_bench`] enforces.
    pub fn validate(&self) -> Result<(), BenchError> {
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for n in self.inputs.iter().chain(self.cells.iter().map(|c| &c.output)) {
            check_name(n, 0)?;
            if seen.insert(n, ()).is_some() {
                return Err(BenchError::MultiplyDriven {
                    line: 0,
                    net: n.clone(),
                });
            }
        }
        for c in &self.cells {
            check_arity(c.op, c.fanins.len(), 0)?;
            for f in &c.fanins {
                if !seen.contains_key(f.as_str()) {
                    return Err(BenchError::Undriven {
                        line: 0,
                        net: f.clone(),
                    });
                }
            }
        }
        let mut outs = BTreeSet::new();
        for o in &self.outputs {
            if !seen.contains_key(o.as_str()) {
                return Err(BenchError::Undriven {
                    line: 0,
                    net: o.clone(),
                });
            }
            if !outs.insert(o) {
                return Err(BenchError::DuplicateOutput {
                    line: 0,
                    net: o.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown op `{op}`")]
    UnknownOp { line: usize, op: String },
    #[error("line {line}: net `{net}` is used but never driven")]
    Undriven { line: usize, net: String },
    #[error("line {line}: net `{net}` is driven more than once")]
    MultiplyDriven { line: usize, net: String },
    #[error("line {line}: {op} takes {expected} fanin(s), got {got}")]
    Arity {
        line: usize,
        op: Op,
        expected: &'static str,
        got: usize,
    },
    #[error("line {line}: output `{net}` declared twice")]
    DuplicateOutput { line: usize, net: String },
    #[error("line {line}: bad annotation: {msg}")]
    Annotation { line: usize, msg: String },
}

fn check_name(name: &str, line: usize) -> Result<(), BenchError> {
    let ok = !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.');
    if ok {
        Ok(())
    } else {
        Err(BenchError::Syntax {
            line,
            msg: format!("invalid net name `{name}`"),
        })
    }
}

fn check_arity(op: Op, got: usize, line: usize) -> Result<(), BenchError> {
    let (ok, expected) = if op.is_unary() {
        (got == 1, "exactly 1")
    } else {
        (got >= 2, "at least 2")
    };
    if ok {
        Ok(())
    } else {
        Err(BenchError::Arity {
            line,
            op,
            expected,
            got,
        })
    }
}

/// Parses `KEYWORD(arg)` returning the argument when the keyword matches.
fn keyword_arg<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let head = line.get(..keyword.len())?;
    if !head.eq_ignore_ascii_case(keyword) {
        return None;
    }
    let rest = line[keyword.len()..].trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.trim())
}

/// Parses `.bench` text into a validated [`Netlist`].
pub fn parse_bench(text: &str) -> Result<Netlist, BenchError> {
    let mut netlist = Netlist::default();
    // First line each net is driven / used, for error reporting.
    let mut driven_at: HashMap<String, usize> = HashMap::new();
    let mut uses: Vec<(String, usize)> = Vec::new();
    let mut outputs_at: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(arg) = keyword_arg(line, "INPUT") {
            check_name(arg, line_no)?;
            if driven_at.insert(arg.to_string(), line_no).is_some() {
                return Err(BenchError::MultiplyDriven {
                    line: line_no,
                    net: arg.to_string(),
                });
            }
            netlist.inputs.push(arg.to_string());
            continue;
        }
        if let Some(arg) = keyword_arg(line, "OUTPUT") {
            check_name(arg, line_no)?;
            if outputs_at.iter().any(|(n, _)| n == arg) {
                return Err(BenchError::DuplicateOutput {
                    line: line_no,
                    net: arg.to_string(),
                });
            }
            outputs_at.push((arg.to_string(), line_no));
            netlist.outputs.push(arg.to_string());
            continue;
        }
        let Some((lhs, rhs)) = line.split_once('=') else {
            return Err(BenchError::Syntax {
                line: line_no,
                msg: format!("expected INPUT(..), OUTPUT(..) or assignment, found `{line}`"),
            });
        };
        let out = lhs.trim();
        check_name(out, line_no)?;
        let rhs = rhs.trim();
        let (op_name, args) = match rhs.split_once('(') {
            Some((op, rest)) => match rest.trim_end().strip_suffix(')') {
                Some(args) => (op.trim(), args),
                None => {
                    return Err(BenchError::Syntax {
                        line: line_no,
                        msg: "missing `)`".into(),
                    })
                }
            },
            None => {
                return Err(BenchError::Syntax {
                    line: line_no,
                    msg: format!("expected OP(args) after `=`, found `{rhs}`"),
                })
            }
        };
        let op: Op = op_name.parse().map_err(|_| BenchError::UnknownOp {
            line: line_no,
            op: op_name.to_string(),
        })?;
        let fanins: Vec<String> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',').map(|a| a.trim().to_string()).collect()
        };
        for f in &fanins {
            check_name(f, line_no)?;
        }
        check_arity(op, fanins.len(), line_no)?;
        if driven_at.insert(out.to_string(), line_no).is_some() {
            return Err(BenchError::MultiplyDriven {
                line: line_no,
                net: out.to_string(),
            });
        }
        uses.extend(fanins.iter().map(|f| (f.clone(), line_no)));
        netlist.cells.push(Cell {
            output: out.to_string(),
            op,
            fanins,
        });
    }

    for (net, line) in uses.iter().chain(&outputs_at) {
        if !driven_at.contains_key(net) {
            return Err(BenchError::Undriven {
                line: *line,
                net: net.clone(),
            });
        }
    }
    Ok(netlist)
}

/// Writes a plain netlist in `.bench` syntax.
pub fn write_bench(netlist: &Netlist) -> String {
    let mut out = String::new();
    if !netlist.name.is_empty() {
        out.push_str(&format!("# {}\n", netlist.name));
    }
    out.push_str(&format!(
        "# {} inputs, {} outputs, {} registers, {} gates\n",
        netlist.inputs.len(),
        netlist.outputs.len(),
        netlist.num_registers(),
        netlist.num_gates()
    ));
    for i in &netlist.inputs {
        out.push_str(&format!("INPUT({i})\n"));
    }
    for o in &netlist.outputs {
        out.push_str(&format!("OUTPUT({o})\n"));
    }
    for c in &netlist.cells {
        out.push_str(&format!("{} = {}({})\n", c.output, c.op, c.fanins.join(", ")));
    }
    out
}

/// A clocked element of an annotated netlist.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    /// A primary input or a cell, named by the net it drives.
    Net(String),
    /// The interface cell of the primary output at this position.
    Output(usize),
}

/// Netlist after clocking: inserted DFFs, per-element depth and phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedNetlist {
    /// Transformed circuit. Each output entry names the net that feeds the
    /// output port, which is the last inserted DFF when the port needed
    /// balancing.
    pub netlist: Netlist,
    /// Names of inserted path-balancing DFF cells.
    pub inserted: BTreeSet<String>,
    pub depth_of: BTreeMap<Element, i64>,
    pub phase_of: BTreeMap<Element, u32>,
    pub n_phases: u32,
    pub d_loop: u32,
    pub hold_safe: bool,
}

impl AnnotatedNetlist {
    pub fn threads(&self) -> u32 {
        self.d_loop / self.n_phases
    }

    /// Largest depth gap allowed across one wire.
    pub fn window(&self) -> i64 {
        if self.hold_safe {
            self.n_phases as i64 - 1
        } else {
            self.n_phases as i64
        }
    }

    /// Registers of the source circuit (DFF cells that were not inserted).
    pub fn is_register(&self, cell: &Cell) -> bool {
        cell.op == Op::Dff && !self.inserted.contains(&cell.output)
    }

    pub fn phase(&self, e: &Element) -> Option<u32> {
        self.phase_of.get(e).copied()
    }

    pub fn depth(&self, e: &Element) -> Option<i64> {
        self.depth_of.get(e).copied()
    }

    /// All elements that must carry a label: inputs, cells and output ports.
    pub fn elements(&self) -> Vec<Element> {
        let nets = self
            .netlist
            .inputs
            .iter()
            .chain(self.netlist.cells.iter().map(|c| &c.output))
            .map(|n| Element::Net(n.clone()));
        nets.chain((0..self.netlist.outputs.len()).map(Element::Output))
            .collect()
    }
}

/// Writes an annotated netlist; clocking rides in comment lines.
pub fn emit_bench(annotated: &AnnotatedNetlist) -> String {
    let mut out = write_bench(&annotated.netlist);
    out.push_str(&format!(
        "# CLOCKING phases={} dloop={} holdsafe={}\n",
        annotated.n_phases, annotated.d_loop, annotated.hold_safe as u8
    ));
    for name in &annotated.inserted {
        out.push_str(&format!("# INSERTED {name}\n"));
    }
    for e in annotated.elements() {
        let (kind, name) = match &e {
            Element::Net(n) => ("", n.as_str()),
            Element::Output(i) => ("OUTPUT_", annotated.netlist.outputs[*i].as_str()),
        };
        if let Some(p) = annotated.phase(&e) {
            out.push_str(&format!("# {kind}PHASE {name} {p}\n"));
        }
        if let Some(d) = annotated.depth(&e) {
            out.push_str(&format!("# {kind}DEPTH {name} {d}\n"));
        }
    }
    out
}

/// Reads back the output of [`emit_bench`], including the clocking comments.
pub fn parse_annotated(text: &str) -> Result<AnnotatedNetlist, BenchError> {
    let netlist = parse_bench(text)?;
    let out_index: HashMap<&str, usize> = netlist
        .outputs
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut n_phases = None;
    let mut d_loop = None;
    let mut hold_safe = false;
    let mut inserted = BTreeSet::new();
    let mut depth_of = BTreeMap::new();
    let mut phase_of = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let Some(body) = raw.trim().strip_prefix('#') else {
            continue;
        };
        let fields: Vec<&str> = body.split_whitespace().collect();
        let bad = |msg: &str| BenchError::Annotation {
            line: line_no,
            msg: msg.to_string(),
        };
        match fields.first().copied() {
            Some("CLOCKING") => {
                for f in &fields[1..] {
                    let (k, v) = f.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    let v: u32 = v.parse().map_err(|_| bad("expected integer"))?;
                    match k {
                        "phases" => n_phases = Some(v),
                        "dloop" => d_loop = Some(v),
                        "holdsafe" => hold_safe = v != 0,
                        _ => {}
                    }
                }
            }
            Some("INSERTED") if fields.len() == 2 => {
                inserted.insert(fields[1].to_string());
            }
            Some(tag @ ("PHASE" | "DEPTH" | "OUTPUT_PHASE" | "OUTPUT_DEPTH")) => {
                if fields.len() != 3 {
                    return Err(bad("expected `<name> <value>`"));
                }
                let element = if tag.starts_with("OUTPUT_") {
                    let i = out_index
                        .get(fields[1])
                        .ok_or_else(|| bad("unknown output"))?;
                    Element::Output(*i)
                } else {
                    Element::Net(fields[1].to_string())
                };
                let value: i64 = fields[2].parse().map_err(|_| bad("expected integer"))?;
                if tag.ends_with("PHASE") {
                    phase_of.insert(element, value as u32);
                } else {
                    depth_of.insert(element, value);
                }
            }
            _ => {}
        }
    }
    let n_phases = n_phases.ok_or(BenchError::Annotation {
        line: 0,
        msg: "missing CLOCKING line".into(),
    })?;
    Ok(AnnotatedNetlist {
        netlist,
        inserted,
        depth_of,
        phase_of,
        n_phases,
        d_loop: d_loop.unwrap_or(n_phases),
        hold_safe,
    })
}
