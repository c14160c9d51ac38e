// SPDX-License-Identifier: Apache-2.0

//! CPLEX-style LP file writer, for cross-checking with external solvers.

use std::fmt::Write;

use super::model::{Model, Sense};

const MAX_LINE: usize = 200;

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn write_expr(out: &mut String, prefix: &str, terms: impl Iterator<Item = (f64, String)>) {
    let mut line = String::from(prefix);
    let mut empty = true;
    for (coef, name) in terms {
        if coef == 0.0 {
            continue;
        }
        let sign = if coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        let term = if mag == 1.0 {
            format!(" {sign} {name}")
        } else {
            format!(" {sign} {} {name}", fmt_num(mag))
        };
        if line.len() + term.len() > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&term);
        empty = false;
    }
    if empty {
        line.push_str(" 0");
    }
    out.push_str(&line);
}

/// Writes `model` in LP file format. With `integer` set, integer variables
/// are listed in a `General` section; otherwise the relaxation is written.
pub fn export_lp_format(model: &Model, integer: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {} variables, {} constraints",
        model.num_vars(),
        model.num_rows()
    );
    out.push_str("Minimize\n");
    write_expr(
        &mut out,
        " obj:",
        model
            .objective
            .iter()
            .enumerate()
            .map(|(j, &c)| (c, model.vars[j].name.clone())),
    );
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let prefix = format!(" {}:", row.name);
        write_expr(
            &mut out,
            &prefix,
            row.terms
                .iter()
                .map(|&(v, a)| (a, model.vars[v.0].name.clone())),
        );
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        let lo = v.lower;
        let hi = v.upper;
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else if hi == f64::INFINITY {
            let _ = writeln!(out, " {} >= {}", v.name, fmt_num(lo));
        } else if lo == f64::NEG_INFINITY {
            let _ = writeln!(out, " -inf <= {} <= {}", v.name, fmt_num(hi));
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(lo), v.name, fmt_num(hi));
        }
    }
    if integer && model.has_integers() {
        out.push_str("General\n");
        let mut line = String::new();
        for v in model.vars.iter().filter(|v| v.integer) {
            if line.len() + v.name.len() + 1 > MAX_LINE {
                let _ = writeln!(out, "{line}");
                line.clear();
            }
            line.push(' ');
            line.push_str(&v.name);
        }
        let _ = writeln!(out, "{line}");
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_general_marker() {
        let mut m = Model::new();
        let a = m.add_var("D_a", 1.0, f64::INFINITY, true);
        let b = m.add_var("D_b", 1.0, f64::INFINITY, true);
        let c = m.add_var("C_a_b", 0.0, f64::INFINITY, true);
        m.set_objective(c, 1.0);
        m.add_row("lo_a_b", vec![(b, 1.0), (a, -1.0)], Sense::Ge, 1.0);
        m.add_row("hi_a_b", vec![(b, 1.0), (a, -1.0), (c, -2.0)], Sense::Le, 2.0);
        let lp = export_lp_format(&m, false);
        assert!(lp.contains("Minimize\n obj: + C_a_b\n"));
        assert!(lp.contains(" lo_a_b: + D_b - D_a >= 1\n"));
        assert!(lp.contains(" hi_a_b: + D_b - D_a - 2 C_a_b <= 2\n"));
        assert!(lp.contains(" D_a >= 1\n"));
        assert!(!lp.contains("General"));
        assert!(lp.ends_with("End\n"));
        let ilp = export_lp_format(&m, true);
        assert!(ilp.contains("General\n D_a D_b C_a_b\n"));
    }
}
