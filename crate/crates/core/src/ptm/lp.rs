//! Dense two-phase simplex with Bland's pivoting rule.
//!
//! Solves `min c.x` subject to `x >= 0` and rows `a.x (<=|>=|=) b`. The
//! problems built by the certifiers are tiny (at most a few hundred rows and
//! columns) so a full tableau is fine. Bland's rule rules out cycling, which
//! matters here: the gap constraints are highly degenerate.

use thiserror::Error;

/// Pivot and reduced-cost threshold.
const PIVOT_EPS: f64 = 1e-11;
/// Phase-one residual above which the program is declared infeasible.
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row has {got} coefficients, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coefficient in the program")]
    NonFinite,
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram { objective, rows: Vec::new() }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) -> Result<(), LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::Dimension { expected: self.objective.len(), got: coeffs.len() });
        }
        self.rows.push((coeffs, rel, rhs));
        Ok(())
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self) -> Result<LpOutcome, LpError> {
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self
                .rows
                .iter()
                .all(|(a, _, b)| b.is_finite() && a.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(LpError::NonFinite);
        }
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    n: usize,
    /// First artificial column; columns at or beyond it are artificial.
    art_start: usize,
    width: usize,
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.variables();
        // Normalize to nonnegative right-hand sides.
        let rows: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|(a, rel, b)| {
                if *b < 0.0 {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (a.iter().map(|v| -v).collect(), flipped, -b)
                } else {
                    (a.clone(), *rel, *b)
                }
            })
            .collect();
        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let arts = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let art_start = n + slacks;
        let width = art_start + arts;
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut s, mut a) = (n, art_start);
        for (coeffs, rel, b) in rows {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&coeffs);
            row[width] = b;
            match rel {
                Relation::Le => {
                    row[s] = 1.0;
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = 1.0;
                    basis.push(a);
                    a += 1;
                }
            }
            t.push(row);
        }
        Tableau { n, art_start, width, t, basis }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpOutcome, LpError> {
        let mut pivots = 0;
        if self.width > self.art_start {
            let mut cost = vec![0.0; self.width + 1];
            cost[self.art_start..self.width].iter_mut().for_each(|c| *c = 1.0);
            self.price_out(&mut cost);
            let allowed = vec![true; self.width];
            self.optimize(&mut cost, &allowed, &mut pivots)?;
            if -cost[self.width] > FEAS_EPS {
                return Ok(LpOutcome::Infeasible);
            }
            self.evict_artificials();
        }
        let mut cost = vec![0.0; self.width + 1];
        cost[..self.n].copy_from_slice(objective);
        self.price_out(&mut cost);
        let allowed: Vec<bool> = (0..self.width).map(|j| j < self.art_start).collect();
        if !self.optimize(&mut cost, &allowed, &mut pivots)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; self.n];
        for (row, &b) in self.t.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[self.width];
            }
        }
        let value = x.iter().zip(objective).map(|(x, c)| x * c).sum();
        Ok(LpOutcome::Optimal { x, value })
    }

    /// Turn raw costs into reduced costs for the current basis.
    fn price_out(&self, cost: &mut [f64]) {
        for (row, &b) in self.t.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (c, v) in cost.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
    }

    /// Returns false when the objective is unbounded below.
    fn optimize(&mut self, cost: &mut [f64], allowed: &[bool], pivots: &mut usize) -> Result<bool, LpError> {
        loop {
            let Some(col) = (0..self.width).find(|&j| allowed[j] && cost[j] < -PIVOT_EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[col] > PIVOT_EPS {
                    let ratio = row[self.width] / row[col];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(row, col, cost);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(LpError::PivotLimit(MAX_PIVOTS));
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let f = cost[c];
        if f != 0.0 {
            cost.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        }
        self.basis[r] = c;
    }

    /// After phase one, pivot zero-level artificials out of the basis and
    /// drop rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.art_start {
                let col = (0..self.art_start).find(|&j| self.t[i][j].abs() > PIVOT_EPS);
                match col {
                    Some(j) => {
                        let mut dummy = vec![0.0; self.width + 1];
                        self.pivot(i, j, &mut dummy);
                    }
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
