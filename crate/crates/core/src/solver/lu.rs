// SPDX-License-Identifier: Apache-2.0

//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The factorization is computed by right-looking Gaussian elimination with
//! Markowitz pivot selection and threshold pivoting. Singleton rows and
//! columns are taken first, which makes the near-triangular bases of
//! difference-constraint programs factor with almost no fill.
//!
//! After factorization, basis changes are absorbed as eta columns
//! (`B_new = B * E`), so FTRAN/BTRAN apply the LU solve and then the etas.

use std::collections::BTreeSet;

const ZERO_TOL: f64 = 1e-12;
const THRESHOLD: f64 = 0.1;
const MARKOWITZ_CANDIDATES: usize = 4;

/// Positions and rows left unpivoted when the basis is singular.
#[derive(Debug, Clone)]
pub struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Step {
    row: usize,
    col: usize,
    pivot: f64,
    l_range: (usize, usize),
    u_range: (usize, usize),
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    range: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct LuFactor {
    m: usize,
    steps: Vec<Step>,
    l_entries: Vec<(usize, f64)>,
    u_entries: Vec<(usize, f64)>,
    etas: Vec<Eta>,
    eta_entries: Vec<(usize, f64)>,
}

struct Active {
    rows: Vec<Vec<(usize, f64)>>,
    cols: Vec<Vec<usize>>,
    row_set: BTreeSet<(usize, usize)>,
    col_set: BTreeSet<(usize, usize)>,
}

impl Active {
    fn value(&self, r: usize, c: usize) -> f64 {
        self.rows[r]
            .iter()
            .find(|&&(cc, _)| cc == c)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    }

    fn col_max(&self, c: usize) -> f64 {
        self.cols[c]
            .iter()
            .map(|&r| self.value(r, c).abs())
            .fold(0.0, f64::max)
    }

    fn choose_pivot(&self) -> Option<(usize, usize)> {
        // Empty rows and columns stay behind and are reported as singular.
        let &(ccount, c) = self.col_set.range((1, 0)..).next()?;
        if ccount == 1 {
            let r = self.cols[c][0];
            if self.value(r, c).abs() > ZERO_TOL {
                return Some((r, c));
            }
        }
        if let Some(&(1, r)) = self.row_set.range((1, 0)..).next() {
            let (c, v) = self.rows[r][0];
            if v.abs() >= THRESHOLD * self.col_max(c) && v.abs() > ZERO_TOL {
                return Some((r, c));
            }
        }

        // Markowitz search over the shortest columns and rows.
        let mut best: Option<(usize, f64, usize, usize)> = None;
        let consider = |r: usize, c: usize, v: f64, cmax: f64, best: &mut Option<(usize, f64, usize, usize)>| {
            if v.abs() <= ZERO_TOL || v.abs() < THRESHOLD * cmax {
                return;
            }
            let cost = (self.rows[r].len() - 1) * (self.cols[c].len() - 1);
            let better = match best {
                None => true,
                Some((bc, bv, _, _)) => cost < *bc || (cost == *bc && v.abs() > *bv),
            };
            if better {
                *best = Some((cost, v.abs(), r, c));
            }
        };
        for &(_, c) in self.col_set.range((1, 0)..).take(MARKOWITZ_CANDIDATES) {
            let cmax = self.col_max(c);
            for &r in &self.cols[c] {
                consider(r, c, self.value(r, c), cmax, &mut best);
            }
        }
        for &(_, r) in self.row_set.range((1, 0)..).take(MARKOWITZ_CANDIDATES) {
            for &(c, v) in &self.rows[r] {
                let cmax = self.col_max(c);
                consider(r, c, v, cmax, &mut best);
            }
        }
        if let Some((_, _, r, c)) = best {
            return Some((r, c));
        }

        // Fall back to the largest remaining entry.
        let mut fallback: Option<(f64, usize, usize)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                if v.abs() > ZERO_TOL && fallback.is_none_or(|(bv, _, _)| v.abs() > bv) {
                    fallback = Some((v.abs(), r, c));
                }
            }
        }
        fallback.map(|(_, r, c)| (r, c))
    }
}

impl LuFactor {
    /// Factorizes the `m x m` matrix whose column `p` is `columns[p]`
    /// (a list of `(row, value)` entries).
    pub fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(columns.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v != 0.0 {
                    rows[r].push((c, v));
                    cols[c].push(r);
                }
            }
        }
        let row_set = rows.iter().enumerate().map(|(r, e)| (e.len(), r)).collect();
        let col_set = cols.iter().enumerate().map(|(c, e)| (e.len(), c)).collect();
        let mut a = Active {
            rows,
            cols,
            row_set,
            col_set,
        };

        let mut lu = LuFactor {
            m,
            steps: Vec::with_capacity(m),
            l_entries: Vec::new(),
            u_entries: Vec::new(),
            etas: Vec::new(),
            eta_entries: Vec::new(),
        };
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        let mut pos = vec![usize::MAX; m];

        for _ in 0..m {
            let Some((r, c)) = a.choose_pivot() else {
                return Err(Singular {
                    positions: (0..m).filter(|&c| !col_done[c]).collect(),
                    rows: (0..m).filter(|&r| !row_done[r]).collect(),
                });
            };
            let pivot = a.value(r, c);

            // Pivot row becomes a row of U.
            let u_row = std::mem::take(&mut a.rows[r]);
            a.row_set.remove(&(u_row.len(), r));
            for &(c2, _) in &u_row {
                a.col_set.remove(&(a.cols[c2].len(), c2));
                let list = &mut a.cols[c2];
                if let Some(i) = list.iter().position(|&x| x == r) {
                    list.swap_remove(i);
                }
            }
            let u_start = lu.u_entries.len();
            lu.u_entries
                .extend(u_row.iter().filter(|&&(c2, _)| c2 != c).copied());
            let u_end = lu.u_entries.len();

            // Eliminate column c from the remaining rows.
            let l_start = lu.l_entries.len();
            let sub_rows = std::mem::take(&mut a.cols[c]);
            for &i in &sub_rows {
                a.row_set.remove(&(a.rows[i].len(), i));
                let row = &mut a.rows[i];
                let k = row.iter().position(|&(cc, _)| cc == c).expect("pattern out of sync");
                let (_, aic) = row.swap_remove(k);
                let l = aic / pivot;
                lu.l_entries.push((i, l));
                for (k, &(cc, _)) in row.iter().enumerate() {
                    pos[cc] = k;
                }
                for &(c2, v) in &lu.u_entries[u_start..u_end] {
                    if pos[c2] != usize::MAX {
                        row[pos[c2]].1 -= l * v;
                    } else {
                        pos[c2] = row.len();
                        row.push((c2, -l * v));
                        a.cols[c2].push(i);
                    }
                }
                for &(cc, _) in row.iter() {
                    pos[cc] = usize::MAX;
                }
                a.row_set.insert((a.rows[i].len(), i));
            }
            let l_end = lu.l_entries.len();
            for &(c2, _) in &u_row {
                if c2 != c {
                    a.col_set.insert((a.cols[c2].len(), c2));
                }
            }
            row_done[r] = true;
            col_done[c] = true;
            lu.steps.push(Step {
                row: r,
                col: c,
                pivot,
                l_range: (l_start, l_end),
                u_range: (u_start, u_end),
            });
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_entries.len()
    }

    pub fn lu_nnz(&self) -> usize {
        self.l_entries.len() + self.u_entries.len() + self.steps.len()
    }

    /// Solves `B x = b`; `b` is indexed by row, the result by basis position.
    pub fn ftran(&self, mut b: Vec<f64>) -> Vec<f64> {
        for s in &self.steps {
            let br = b[s.row];
            if br != 0.0 {
                for &(i, l) in &self.l_entries[s.l_range.0..s.l_range.1] {
                    b[i] -= l * br;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for s in self.steps.iter().rev() {
            let mut acc = b[s.row];
            for &(c, v) in &self.u_entries[s.u_range.0..s.u_range.1] {
                acc -= v * x[c];
            }
            x[s.col] = acc / s.pivot;
        }
        for e in &self.etas {
            let xr = x[e.pos] / e.pivot;
            x[e.pos] = xr;
            if xr != 0.0 {
                for &(i, a) in &self.eta_entries[e.range.0..e.range.1] {
                    x[i] -= a * xr;
                }
            }
        }
        x
    }

    /// Solves `B' y = c`; `c` is indexed by basis position, the result by row.
    pub fn btran(&self, mut c: Vec<f64>) -> Vec<f64> {
        for e in self.etas.iter().rev() {
            let mut acc = c[e.pos];
            for &(i, a) in &self.eta_entries[e.range.0..e.range.1] {
                acc -= a * c[i];
            }
            c[e.pos] = acc / e.pivot;
        }
        let mut z = vec![0.0; self.m];
        for s in &self.steps {
            let zr = c[s.col] / s.pivot;
            z[s.row] = zr;
            if zr != 0.0 {
                for &(col, v) in &self.u_entries[s.u_range.0..s.u_range.1] {
                    c[col] -= v * zr;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut acc = 0.0;
            for &(i, l) in &self.l_entries[s.l_range.0..s.l_range.1] {
                acc += l * z[i];
            }
            z[s.row] -= acc;
        }
        z
    }

    /// Replaces the basis column at `pos` by a column whose FTRAN image is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let start = self.eta_entries.len();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > ZERO_TOL {
                self.eta_entries.push((i, a));
            }
        }
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            range: (start, self.eta_entries.len()),
        });
    }
}
