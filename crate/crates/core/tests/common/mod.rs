// SPDX-License-Identifier: Apache-2.0

//! Oracles shared by the integration tests. Each is written independently
//! of the library code it checks.

#![allow(dead_code)]

use std::collections::HashMap;

use sfq_clocking::bench::{Netlist, Op};
use sfq_clocking::solver::model::{Model, Sense};

/// Cycle interpreter: every net is evaluated on demand from the current
/// inputs and the register state of the previous cycle. Registers start at 0.
pub fn interpret(n: &Netlist, vectors: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let cell: HashMap<&str, usize> = n.cells.iter().enumerate().map(|(i, c)| (c.output.as_str(), i)).collect();
    let mut state: HashMap<&str, bool> = n
        .cells
        .iter()
        .filter(|c| c.op == Op::Dff)
        .map(|c| (c.output.as_str(), false))
        .collect();
    let mut out = vec![Vec::new(); n.outputs.len()];
    for v in vectors {
        let mut memo: HashMap<&str, bool> = n.inputs.iter().map(String::as_str).zip(v.iter().copied()).collect();
        memo.extend(state.iter().map(|(k, v)| (*k, *v)));
        fn eval<'a>(net: &'a str, n: &'a Netlist, cell: &HashMap<&str, usize>, memo: &mut HashMap<&'a str, bool>) -> bool {
            if let Some(&v) = memo.get(net) {
                return v;
            }
            let c = &n.cells[cell[net]];
            let ins: Vec<bool> = c.fanins.iter().map(|f| eval(f, n, cell, memo)).collect();
            let v = c.op.eval(&ins);
            memo.insert(net, v);
            v
        }
        for (k, o) in n.outputs.iter().enumerate() {
            out[k].push(eval(o, n, &cell, &mut memo));
        }
        let next: Vec<(&str, bool)> = n
            .cells
            .iter()
            .filter(|c| c.op == Op::Dff)
            .map(|c| (c.output.as_str(), eval(&c.fanins[0], n, &cell, &mut memo)))
            .collect();
        state.extend(next);
    }
    out
}

/// Small pure-integer program: `x_i` in `0..=upper_i`, minimize `cost . x`.
#[derive(Clone, Debug)]
pub struct Small {
    pub upper: Vec<i64>,
    pub cost: Vec<i64>,
    pub rows: Vec<(Vec<i64>, Sense, i64)>,
}

impl Small {
    pub fn to_model(&self) -> Model {
        let mut m = Model::new();
        let vars: Vec<_> = self
            .upper
            .iter()
            .enumerate()
            .map(|(i, &u)| m.add_var(format!("x{i}"), 0.0, u as f64, true))
            .collect();
        for (v, &c) in vars.iter().zip(&self.cost) {
            m.set_objective(*v, c as f64);
        }
        for (k, (coef, sense, rhs)) in self.rows.iter().enumerate() {
            let terms = vars.iter().zip(coef).map(|(&v, &a)| (v, a as f64)).collect();
            m.add_row(format!("r{k}"), terms, *sense, *rhs as f64);
        }
        m
    }

    /// Exhaustive minimum over the integer box; `None` when infeasible.
    pub fn brute_force(&self) -> Option<i64> {
        let n = self.upper.len();
        let mut x = vec![0i64; n];
        let mut best: Option<i64> = None;
        loop {
            let feasible = self.rows.iter().all(|(coef, sense, rhs)| {
                let lhs: i64 = coef.iter().zip(&x).map(|(a, b)| a * b).sum();
                match sense {
                    Sense::Le => lhs <= *rhs,
                    Sense::Ge => lhs >= *rhs,
                    Sense::Eq => lhs == *rhs,
                }
            });
            if feasible {
                let obj: i64 = self.cost.iter().zip(&x).map(|(a, b)| a * b).sum();
                best = Some(best.map_or(obj, |b| b.min(obj)));
            }
            let mut i = 0;
            while i < n && x[i] == self.upper[i] {
                x[i] = 0;
                i += 1;
            }
            if i == n {
                return best;
            }
            x[i] += 1;
        }
    }
}
