// SPDX-License-Identifier: Apache-2.0

//! Parameterized benchmark circuits and random netlists.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{Cell, Netlist, Op};

/// Incremental netlist construction with fresh net names.
#[derive(Debug, Default)]
pub struct Builder {
    netlist: Netlist,
    counter: usize,
}

impl Builder {
    pub fn new(name: &str) -> Self {
        Builder {
            netlist: Netlist {
                name: name.to_string(),
                ..Netlist::default()
            },
            counter: 0,
        }
    }

    pub fn input(&mut self, name: impl Into<String>) -> String {
        let name = name.into();
        self.netlist.inputs.push(name.clone());
        name
    }

    pub fn output(&mut self, net: &str) {
        self.netlist.outputs.push(net.to_string());
    }

    pub fn named(&mut self, name: impl Into<String>, op: Op, fanins: &[&str]) -> String {
        let output = name.into();
        self.netlist.cells.push(Cell {
            output: output.clone(),
            op,
            fanins: fanins.iter().map(|f| f.to_string()).collect(),
        });
        output
    }

    pub fn gate(&mut self, op: Op, fanins: &[&str]) -> String {
        self.counter += 1;
        let name = format!("n{}", self.counter);
        self.named(name, op, fanins)
    }

    pub fn finish(self) -> Netlist {
        self.netlist
    }
}

/// Sum and carry of a full adder built from XOR/AND/OR.
fn full_adder(b: &mut Builder, x: &str, y: &str, c: &str) -> (String, String) {
    let p = b.gate(Op::Xor, &[x, y]);
    let s = b.gate(Op::Xor, &[&p, c]);
    let g = b.gate(Op::And, &[x, y]);
    let t = b.gate(Op::And, &[&p, c]);
    let co = b.gate(Op::Or, &[&g, &t]);
    (s, co)
}

/// Full adder from nine two-input NANDs.
fn full_adder_nand(b: &mut Builder, x: &str, y: &str, c: &str) -> (String, String) {
    let n1 = b.gate(Op::Nand, &[x, y]);
    let n2 = b.gate(Op::Nand, &[x, &n1]);
    let n3 = b.gate(Op::Nand, &[y, &n1]);
    let p = b.gate(Op::Nand, &[&n2, &n3]);
    let n5 = b.gate(Op::Nand, &[&p, c]);
    let n6 = b.gate(Op::Nand, &[&p, &n5]);
    let n7 = b.gate(Op::Nand, &[c, &n5]);
    let s = b.gate(Op::Nand, &[&n6, &n7]);
    let co = b.gate(Op::Nand, &[&n1, &n5]);
    (s, co)
}

/// Half adder from five NANDs.
fn half_adder_nand(b: &mut Builder, x: &str, y: &str) -> (String, String) {
    let n1 = b.gate(Op::Nand, &[x, y]);
    let n2 = b.gate(Op::Nand, &[x, &n1]);
    let n3 = b.gate(Op::Nand, &[y, &n1]);
    let s = b.gate(Op::Nand, &[&n2, &n3]);
    let c = b.gate(Op::Nand, &[&n1, &n1]);
    (s, c)
}

/// `bits`-wide ripple-carry adder with carry in and carry out.
pub fn ripple_adder(bits: usize) -> Netlist {
    let mut b = Builder::new(&format!("add{bits}_ripple"));
    let a: Vec<String> = (0..bits).map(|i| b.input(format!("a{i}"))).collect();
    let y: Vec<String> = (0..bits).map(|i| b.input(format!("b{i}"))).collect();
    let mut carry = b.input("cin");
    for i in 0..bits {
        let (s, c) = full_adder(&mut b, &a[i], &y[i], &carry);
        b.output(&s);
        carry = c;
    }
    b.output(&carry);
    b.finish()
}

/// Unsigned `bits` x `bits` array multiplier. With `nand_only` every adder
/// cell is mapped to two-input NANDs.
pub fn array_multiplier(bits: usize, nand_only: bool) -> Netlist {
    let name = if nand_only {
        format!("mul{bits}_nand")
    } else {
        format!("mul{bits}_array")
    };
    let mut b = Builder::new(&name);
    let a: Vec<String> = (0..bits).map(|i| b.input(format!("a{i}"))).collect();
    let y: Vec<String> = (0..bits).map(|i| b.input(format!("b{i}"))).collect();
    let mut pp = vec![vec![String::new(); bits]; bits];
    for i in 0..bits {
        for j in 0..bits {
            pp[i][j] = if nand_only {
                let t = b.gate(Op::Nand, &[&a[j], &y[i]]);
                b.gate(Op::Nand, &[&t, &t])
            } else {
                b.gate(Op::And, &[&a[j], &y[i]])
            };
        }
    }
    let fa = |b: &mut Builder, x: &str, y: &str, c: &str| {
        if nand_only {
            full_adder_nand(b, x, y, c)
        } else {
            full_adder(b, x, y, c)
        }
    };
    let ha = |b: &mut Builder, x: &str, y: &str| {
        if nand_only {
            half_adder_nand(b, x, y)
        } else {
            (b.gate(Op::Xor, &[x, y]), b.gate(Op::And, &[x, y]))
        }
    };
    // Row i adds partial product row i into the running sum.
    let mut sum: Vec<String> = pp[0].clone();
    b.output(&sum[0]);
    for (i, row) in pp.iter().enumerate().skip(1) {
        let mut next = Vec::with_capacity(bits);
        let mut carry: Option<String> = None;
        for j in 0..bits {
            let upper = sum.get(j + 1).cloned();
            let (s, c) = match (upper, carry.take()) {
                (Some(u), Some(c)) => fa(&mut b, &row[j], &u, &c),
                (Some(u), None) => ha(&mut b, &row[j], &u),
                (None, Some(c)) => ha(&mut b, &row[j], &c),
                (None, None) => (row[j].clone(), String::new()),
            };
            next.push(s);
            if !c.is_empty() {
                carry = Some(c);
            }
        }
        b.output(&next[0]);
        if let Some(c) = carry {
            next.push(c);
        }
        sum = next;
        if i + 1 == bits {
            for s in &sum[1..] {
                b.output(s);
            }
        }
    }
    b.finish()
}

/// Linear XOR chain over `bits` inputs: deeply unbalanced fanin depths.
pub fn parity_chain(bits: usize) -> Netlist {
    let mut b = Builder::new(&format!("parity{bits}_chain"));
    let x: Vec<String> = (0..bits).map(|i| b.input(format!("x{i}"))).collect();
    let mut acc = x[0].clone();
    for xi in &x[1..] {
        acc = b.gate(Op::Xor, &[&acc, xi]);
    }
    b.output(&acc);
    b.finish()
}

/// `a > b` and `a == b` for unsigned `bits`-wide operands, MSB-first chain.
pub fn comparator(bits: usize) -> Netlist {
    let mut b = Builder::new(&format!("cmp{bits}"));
    let a: Vec<String> = (0..bits).map(|i| b.input(format!("a{i}"))).collect();
    let y: Vec<String> = (0..bits).map(|i| b.input(format!("b{i}"))).collect();
    let mut gt: Option<String> = None;
    let mut eq: Option<String> = None;
    for i in (0..bits).rev() {
        let nb = b.gate(Op::Not, &[&y[i]]);
        let g = b.gate(Op::And, &[&a[i], &nb]);
        let e = b.gate(Op::Xnor, &[&a[i], &y[i]]);
        match (gt.take(), eq.take()) {
            (Some(pg), Some(pe)) => {
                let t = b.gate(Op::And, &[&pe, &g]);
                gt = Some(b.gate(Op::Or, &[&pg, &t]));
                eq = Some(b.gate(Op::And, &[&pe, &e]));
            }
            _ => {
                gt = Some(g);
                eq = Some(e);
            }
        }
    }
    b.output(gt.as_deref().unwrap());
    b.output(eq.as_deref().unwrap());
    b.finish()
}

/// `bits`-to-`2^bits` one-hot decoder with enable.
pub fn decoder(bits: usize) -> Netlist {
    let mut b = Builder::new(&format!("dec{bits}"));
    let x: Vec<String> = (0..bits).map(|i| b.input(format!("s{i}"))).collect();
    let en = b.input("en");
    let nx: Vec<String> = x.iter().map(|s| b.gate(Op::Not, &[s])).collect();
    for code in 0..(1usize << bits) {
        let mut lits: Vec<&str> = (0..bits)
            .map(|i| if code >> i & 1 == 1 { x[i].as_str() } else { nx[i].as_str() })
            .collect();
        lits.push(&en);
        let o = b.gate(Op::And, &lits);
        b.output(&o);
    }
    b.finish()
}

/// Synchronous up-counter with enable; the carry into bit `i` is an AND
/// chain over the lower bits.
pub fn counter(bits: usize) -> Netlist {
    let mut b = Builder::new(&format!("count{bits}"));
    let en = b.input("en");
    let q: Vec<String> = (0..bits).map(|i| format!("q{i}")).collect();
    let mut carry = en.clone();
    for (i, qi) in q.iter().enumerate() {
        let d = b.gate(Op::Xor, &[qi, &carry]);
        b.named(qi.clone(), Op::Dff, &[&d]);
        b.output(qi);
        if i + 1 < bits {
            carry = b.gate(Op::And, &[&carry, qi]);
        }
    }
    b.output(&carry);
    b.finish()
}

/// Fibonacci LFSR with a load input mixed into the feedback.
pub fn lfsr(bits: usize, taps: &[usize]) -> Netlist {
    let mut b = Builder::new(&format!("lfsr{bits}"));
    let din = b.input("din");
    let q: Vec<String> = (0..bits).map(|i| format!("r{i}")).collect();
    let mut fb = din.clone();
    for &t in taps {
        fb = b.gate(Op::Xor, &[&fb, &q[t]]);
    }
    b.named(q[0].clone(), Op::Dff, &[&fb]);
    for i in 1..bits {
        b.named(q[i].clone(), Op::Dff, &[&q[i - 1]]);
    }
    b.output(&q[bits - 1]);
    b.output(&fb);
    b.finish()
}

/// Accumulator: `acc <= acc + x`, with the ripple sum exposed.
pub fn accumulator(bits: usize) -> Netlist {
    let mut b = Builder::new(&format!("acc{bits}"));
    let x: Vec<String> = (0..bits).map(|i| b.input(format!("x{i}"))).collect();
    let clr = b.input("clr");
    let nclr = b.gate(Op::Not, &[&clr]);
    let acc: Vec<String> = (0..bits).map(|i| format!("acc{i}")).collect();
    let mut carry: Option<String> = None;
    for i in 0..bits {
        let (s, c) = match carry.take() {
            Some(c) => full_adder(&mut b, &x[i], &acc[i], &c),
            None => (
                b.gate(Op::Xor, &[&x[i], &acc[i]]),
                b.gate(Op::And, &[&x[i], &acc[i]]),
            ),
        };
        let d = b.gate(Op::And, &[&s, &nclr]);
        b.named(acc[i].clone(), Op::Dff, &[&d]);
        b.output(&s);
        carry = Some(c);
    }
    b.output(carry.as_deref().unwrap());
    b.finish()
}

/// Random combinational or sequential netlist. Gates draw fanins from
/// earlier nets, so the only cycles run through registers.
pub fn random_netlist(
    name: &str,
    seed: u64,
    inputs: usize,
    gates: usize,
    registers: usize,
    outputs: usize,
) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new(name);
    let mut pool: Vec<String> = (0..inputs).map(|i| b.input(format!("i{i}"))).collect();
    let regs: Vec<String> = (0..registers).map(|i| format!("r{i}")).collect();
    pool.extend(regs.iter().cloned());
    let ops = [Op::And, Op::Nand, Op::Or, Op::Nor, Op::Xor, Op::Xnor, Op::Not, Op::Buff];
    let mut gate_nets = Vec::with_capacity(gates);
    for _ in 0..gates {
        let op = *ops.choose(&mut rng).unwrap();
        let arity = if op.is_unary() { 1 } else { rng.gen_range(2..=3) };
        // Favor recent nets to build depth.
        let fanins: Vec<String> = (0..arity)
            .map(|_| {
                let lo = pool.len().saturating_sub(8);
                let idx = if rng.gen_bool(0.7) {
                    rng.gen_range(lo..pool.len())
                } else {
                    rng.gen_range(0..pool.len())
                };
                pool[idx].clone()
            })
            .collect();
        let refs: Vec<&str> = fanins.iter().map(String::as_str).collect();
        let g = b.gate(op, &refs);
        pool.push(g.clone());
        gate_nets.push(g);
    }
    let sources: Vec<String> = if gate_nets.is_empty() {
        pool.clone()
    } else {
        gate_nets.clone()
    };
    for r in &regs {
        let d = sources.choose(&mut rng).unwrap().clone();
        b.named(r.clone(), Op::Dff, &[&d]);
    }
    let mut outs: Vec<String> = Vec::new();
    if let Some(last) = gate_nets.last() {
        outs.push(last.clone());
    }
    while outs.len() < outputs.max(1) {
        let o = pool.choose(&mut rng).unwrap().clone();
        if !outs.contains(&o) {
            outs.push(o);
        } else if outs.len() >= pool.len() {
            break;
        }
    }
    for o in &outs {
        b.output(o);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::build_dag;
    use crate::simulator::simulate_golden;

    fn bits_of(v: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| v >> i & 1 == 1).collect()
    }

    fn value(bits: &[bool]) -> u64 {
        bits.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum()
    }

    fn eval(n: &Netlist, inputs: Vec<bool>) -> Vec<bool> {
        simulate_golden(n, &[inputs]).unwrap().into_iter().map(|s| s[0]).collect()
    }

    #[test]
    fn adder_adds() {
        let n = ripple_adder(4);
        for (x, y, c) in [(3u64, 5u64, 0u64), (15, 15, 1), (9, 6, 1)] {
            let mut v = bits_of(x, 4);
            v.extend(bits_of(y, 4));
            v.push(c == 1);
            assert_eq!(value(&eval(&n, v)), x + y + c);
        }
    }

    #[test]
    fn multipliers_multiply() {
        for nand in [false, true] {
            let n = array_multiplier(4, nand);
            n.validate().unwrap();
            for (x, y) in [(0u64, 7u64), (15, 15), (6, 11), (9, 13)] {
                let mut v = bits_of(x, 4);
                v.extend(bits_of(y, 4));
                assert_eq!(value(&eval(&n, v)), x * y, "{x}*{y} nand={nand}");
            }
        }
    }

    #[test]
    fn large_multiplier_size() {
        let n = array_multiplier(16, true);
        assert!(n.num_gates() >= 2000, "{}", n.num_gates());
        let mut v = bits_of(40_000, 16);
        v.extend(bits_of(1_234, 16));
        assert_eq!(value(&eval(&n, v)), 40_000 * 1_234);
    }

    #[test]
    fn comparator_and_decoder() {
        let n = comparator(4);
        for (x, y) in [(3u64, 5u64), (9, 9), (12, 4)] {
            let mut v = bits_of(x, 4);
            v.extend(bits_of(y, 4));
            assert_eq!(eval(&n, v), vec![x > y, x == y]);
        }
        let d = decoder(3);
        let mut v = bits_of(5, 3);
        v.push(true);
        assert_eq!(value(&eval(&d, v)), 1 << 5);
    }

    #[test]
    fn counter_counts() {
        let n = counter(3);
        let out = simulate_golden(&n, &vec![vec![true]; 10]).unwrap();
        let q: Vec<u64> = (0..10).map(|t| value(&[out[0][t], out[1][t], out[2][t]])).collect();
        assert_eq!(q, vec![0, 1, 2, 3, 4, 5, 6, 7, 0, 1]);
    }

    #[test]
    fn random_netlists_are_valid() {
        for seed in 0..20 {
            let n = random_netlist("r", seed, 4, 30, 3, 3);
            n.validate().unwrap();
            build_dag(&n).unwrap();
        }
    }
}
