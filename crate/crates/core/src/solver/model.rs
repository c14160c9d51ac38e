// SPDX-License-Identifier: Apache-2.0

//! Generic linear / integer linear program container.

use std::fmt;

/// Index of a variable inside a [`Model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Index of a row inside a [`Model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    /// Branching priority; lower values are branched on first.
    pub priority: u8,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization problem `min c'x  s.t.  rows, lower <= x <= upper`.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    pub objective: Vec<f64>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
            priority: 0,
        });
        self.objective.push(0.0);
        id
    }

    pub fn set_priority(&mut self, var: VarId, priority: u8) {
        self.vars[var.0].priority = priority;
    }

    pub fn set_objective(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] = coeff;
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        let id = RowId(self.rows.len());
        self.rows.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        id
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.integer)
    }

    /// True when every integral point has an integral objective value.
    pub fn objective_is_integral(&self) -> bool {
        self.vars.iter().zip(&self.objective).all(|(v, &c)| {
            c == 0.0 || (v.integer && c.fract() == 0.0)
        })
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self.vars.iter().zip(values).map(|(v, &x)| {
            (v.lower - x).max(x - v.upper).max(0.0)
        });
        let rows = self.rows.iter().map(|r| r.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Exact feasibility check of an integral point.
    ///
    /// Coefficients, bounds and right-hand sides must all be integers for the
    /// check to be exact; otherwise `None` is returned.
    pub fn check_integral_exact(&self, values: &[i64]) -> Option<Result<(), String>> {
        let as_int = |x: f64| -> Option<i128> {
            if x.is_finite() && x.fract() == 0.0 {
                Some(x as i128)
            } else {
                None
            }
        };
        for (v, &x) in self.vars.iter().zip(values) {
            let x = x as i128;
            if v.lower.is_finite() && x < as_int(v.lower)? {
                return Some(Err(format!("{} = {} below lower bound {}", v.name, x, v.lower)));
            }
            if v.upper.is_finite() && x > as_int(v.upper)? {
                return Some(Err(format!("{} = {} above upper bound {}", v.name, x, v.upper)));
            }
        }
        for row in &self.rows {
            let mut lhs: i128 = 0;
            for &(v, a) in &row.terms {
                lhs += as_int(a)? * values[v.0] as i128;
            }
            let rhs = as_int(row.rhs)?;
            let ok = match row.sense {
                Sense::Le => lhs <= rhs,
                Sense::Ge => lhs >= rhs,
                Sense::Eq => lhs == rhs,
            };
            if !ok {
                return Some(Err(format!(
                    "row {}: {} {} {} violated",
                    row.name, lhs, row.sense, rhs
                )));
            }
        }
        Some(Ok(()))
    }
}
