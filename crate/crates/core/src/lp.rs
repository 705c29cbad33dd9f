//! Dense tableau simplex for `max c·x` subject to `A x ≤ b`, `x ≥ 0`.
//!
//! The origin is feasible whenever `b ≥ 0`, so the slack basis starts the
//! primal method without a phase one. Rows can be appended after a solve;
//! they are rewritten in the current basis and reoptimised with the dual
//! simplex, which is what row generation needs.

use alloc::vec::Vec;

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Structural(usize),
    Slack(usize),
}

/// Outcome counters of a solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub primal_pivots: usize,
    pub dual_pivots: usize,
}

/// A linear program kept in tableau form `x_B = rhs − T·x_N`,
/// `z = z₀ + d·x_N`.
#[derive(Debug, Clone)]
pub struct Simplex {
    n_vars: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    reduced: Vec<f64>,
    z0: f64,
    basic: Vec<Var>,
    nonbasic: Vec<Var>,
    /// Position of each structural variable: `Ok(row)` when basic,
    /// `Err(column)` when nonbasic.
    where_is: Vec<core::result::Result<usize, usize>>,
    stats: SolveStats,
    max_pivots: usize,
}

impl Simplex {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Simplex {
            n_vars: n,
            rows: Vec::new(),
            rhs: Vec::new(),
            reduced: objective,
            z0: 0.0,
            basic: Vec::new(),
            nonbasic: (0..n).map(Var::Structural).collect(),
            where_is: (0..n).map(Err).collect(),
            stats: SolveStats::default(),
            max_pivots: 50 * (n + 10),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Append `coeffs·x ≤ rhs`. The row is scaled so that its largest
    /// coefficient has unit size.
    pub fn add_row(&mut self, coeffs: &[f64], rhs: f64) -> Result<()> {
        if coeffs.len() != self.n_vars {
            return Err(Error::param("coeffs", "length differs from the variable count"));
        }
        let scale = coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        let mut row = alloc::vec![0.0; self.n_vars];
        let mut b = rhs * scale;
        for (k, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let a = a * scale;
            match self.where_is[k] {
                Err(col) => row[col] += a,
                Ok(r) => {
                    b -= a * self.rhs[r];
                    for (t, v) in row.iter_mut().zip(&self.rows[r]) {
                        *t -= a * v;
                    }
                }
            }
        }
        let index = self.rows.len();
        self.rows.push(row);
        self.rhs.push(b);
        self.basic.push(Var::Slack(index));
        Ok(())
    }

    /// Optimise from the current basis.
    pub fn solve(&mut self) -> Result<SolveStats> {
        if self.rhs.iter().any(|&b| b < -PIVOT_EPS) {
            if self.reduced.iter().any(|&d| d > PIVOT_EPS) {
                return Err(Error::param("rows", "initial right-hand sides must be nonnegative"));
            }
            self.dual_phase()?;
        }
        self.primal_phase()?;
        Ok(self.stats)
    }

    fn primal_phase(&mut self) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                (0..self.nonbasic.len())
                    .filter(|&j| self.reduced[j] > PIVOT_EPS)
                    .min_by_key(|&j| var_order(self.nonbasic[j]))
            } else {
                let mut best = None;
                let mut best_d = PIVOT_EPS;
                for (j, &d) in self.reduced.iter().enumerate() {
                    if d > best_d {
                        best_d = d;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(q) = entering else { return Ok(()) };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for (i, row) in self.rows.iter().enumerate() {
                let t = row[q];
                if t > PIVOT_EPS {
                    let ratio = self.rhs[i].max(0.0) / t;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-14
                                || (ratio <= best_ratio + 1e-14
                                    && if bland {
                                        var_order(self.basic[i]) < var_order(self.basic[l])
                                    } else {
                                        t > self.rows[l][q]
                                    })
                        }
                    };
                    if better {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else { return Err(Error::Unbounded) };
            if best_ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, q);
            self.stats.primal_pivots += 1;
            if self.stats.primal_pivots + self.stats.dual_pivots > self.max_pivots {
                return Err(Error::NoConvergence {
                    residual: best_ratio,
                    iterations: self.max_pivots,
                });
            }
        }
    }

    fn dual_phase(&mut self) -> Result<()> {
        loop {
            let mut r = None;
            let mut most = -PIVOT_EPS;
            for (i, &b) in self.rhs.iter().enumerate() {
                if b < most {
                    most = b;
                    r = Some(i);
                }
            }
            let Some(r) = r else { return Ok(()) };
            let row = &self.rows[r];
            let mut q = None;
            let mut best = f64::INFINITY;
            for (j, &t) in row.iter().enumerate() {
                if t < -PIVOT_EPS {
                    let ratio = self.reduced[j].min(0.0) / t;
                    if ratio < best - 1e-14 || (ratio <= best + 1e-14 && q.is_some_and(|k: usize| t < row[k])) {
                        best = ratio;
                        q = Some(j);
                    }
                }
            }
            let Some(q) = q else {
                return Err(Error::param("rows", "constraints are infeasible"));
            };
            self.pivot(r, q);
            self.stats.dual_pivots += 1;
            if self.stats.primal_pivots + self.stats.dual_pivots > self.max_pivots {
                return Err(Error::NoConvergence {
                    residual: -most,
                    iterations: self.max_pivots,
                });
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.rows[r][q];
        let inv = 1.0 / piv;
        {
            let row = &mut self.rows[r];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[q] = inv;
        }
        self.rhs[r] *= inv;
        let pivot_row = core::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[q] = -f * inv;
            self.rhs[i] -= f * pivot_rhs;
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * p;
            }
            self.reduced[q] = -f * inv;
            self.z0 += f * pivot_rhs;
        }
        self.rows[r] = pivot_row;
        let entering = self.nonbasic[q];
        let leaving = self.basic[r];
        self.basic[r] = entering;
        self.nonbasic[q] = leaving;
        if let Var::Structural(k) = entering {
            self.where_is[k] = Ok(r);
        }
        if let Var::Structural(k) = leaving {
            self.where_is[k] = Err(q);
        }
    }

    /// Current primal point (basic values clamped at zero).
    pub fn solution(&self) -> Vec<f64> {
        self.where_is
            .iter()
            .map(|w| match *w {
                Ok(r) => self.rhs[r].max(0.0),
                Err(_) => 0.0,
            })
            .collect()
    }

    /// Objective value of the current basis.
    pub fn objective(&self) -> f64 {
        self.z0
    }

    /// Dual multipliers of the rows at the current basis, in the scaled row
    /// units used internally.
    pub fn row_duals(&self) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.rows.len()];
        for (j, v) in self.nonbasic.iter().enumerate() {
            if let Var::Slack(i) = *v {
                y[i] = -self.reduced[j];
            }
        }
        y
    }
}

fn var_order(v: Var) -> (u8, usize) {
    match v {
        Var::Structural(k) => (0, k),
        Var::Slack(k) => (1, k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = Simplex::new(alloc::vec![3.0, 5.0]);
        lp.add_row(&[1.0, 0.0], 4.0).unwrap();
        lp.add_row(&[0.0, 2.0], 12.0).unwrap();
        lp.add_row(&[3.0, 2.0], 18.0).unwrap();
        lp.solve().unwrap();
        assert!((lp.objective() - 36.0).abs() < 1e-12);
        let x = lp.solution();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn added_row_reoptimises() {
        let mut lp = Simplex::new(alloc::vec![3.0, 5.0]);
        lp.add_row(&[1.0, 0.0], 4.0).unwrap();
        lp.add_row(&[0.0, 2.0], 12.0).unwrap();
        lp.add_row(&[3.0, 2.0], 18.0).unwrap();
        lp.solve().unwrap();
        lp.add_row(&[1.0, 1.0], 5.0).unwrap();
        lp.solve().unwrap();
        // along x + y = 5 the objective is 25 − 2x, so the optimum is (0, 5)
        assert!((lp.objective() - 25.0).abs() < 1e-12);
        assert!(lp.stats().dual_pivots > 0);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = Simplex::new(alloc::vec![1.0, 1.0]);
        lp.add_row(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(lp.solve().unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn duals_match_objective() {
        let mut lp = Simplex::new(alloc::vec![1.0, 1.0, 1.0]);
        lp.add_row(&[1.0, 0.5, 0.25], 1.0).unwrap();
        lp.add_row(&[0.5, 1.0, 0.5], 1.0).unwrap();
        lp.add_row(&[0.25, 0.5, 1.0], 1.0).unwrap();
        lp.solve().unwrap();
        // rows are scaled to unit max coefficient, which is already the case
        let y = lp.row_duals();
        let dual_value: f64 = y.iter().sum();
        assert!((dual_value - lp.objective()).abs() < 1e-12);
    }
}
