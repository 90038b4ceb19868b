//! Dense two-phase simplex for small standard-form LPs
//! `min c^T x  s.t.  A x = b, x >= 0`.
//!
//! Used for the joint weights-and-couplings LP of the full-batch centroid
//! update and as an independent cross-check of the transportation solver.
//! After a solve the final tableau is kept so the same feasible region can be
//! re-optimized under a new cost vector without redoing phase one.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    /// structural variables
    n: usize,
    /// row-major, width = n + n_art + 1 (last column is the rhs)
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_art: usize,
    pivots: usize,
}

impl DenseSimplex {
    /// Solves the LP given as dense rows of `A`, `b` and `c`.
    pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(Self, LpSolution)> {
        let n = c.len();
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        if a.iter().flatten().chain(b).chain(c).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("LP data"));
        }
        let n_art = a.len();
        let width = n + n_art + 1;
        let rows: Vec<Vec<f64>> = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(r, (row, &rhs))| {
                let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
                let mut t = vec![0.0; width];
                for (dst, v) in t.iter_mut().zip(row) {
                    *dst = sign * v;
                }
                t[n + r] = 1.0;
                t[width - 1] = sign * rhs;
                t
            })
            .collect();
        let mut lp = DenseSimplex {
            n,
            rows,
            basis: (n..n + n_art).collect(),
            n_art,
            pivots: 0,
        };

        // phase one: minimise the sum of artificials
        let mut phase1 = vec![0.0; n + n_art];
        phase1[n..].iter_mut().for_each(|v| *v = 1.0);
        let scale_b = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let infeas = lp.optimize(&phase1, n + n_art)?;
        if infeas > 1e-9 * scale_b {
            return Err(Error::Lp(format!("infeasible (phase-one residual {infeas:e})")));
        }
        lp.expel_artificials();

        let sol = lp.reoptimize(c)?;
        Ok((lp, sol))
    }

    /// Re-optimizes over the same feasible region with a new cost vector,
    /// starting from the current basis.
    pub fn reoptimize(&mut self, c: &[f64]) -> Result<LpSolution> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: c.len() });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("LP cost"));
        }
        let mut full = c.to_vec();
        full.resize(self.n + self.n_art, 0.0);
        let objective = self.optimize(&full, self.n)?;
        let mut x = vec![0.0; self.n];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < self.n {
                x[bv] = self.rows[r].last().copied().unwrap_or(0.0).max(0.0);
            }
        }
        Ok(LpSolution { x, objective })
    }

    /// Total pivots performed so far.
    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Runs primal simplex for `cost` with entering candidates restricted to
    /// columns `< allowed`; returns the objective value.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<f64> {
        let width = self.n + self.n_art + 1;
        let rhs = width - 1;
        // reduced costs d = c - c_B B^-1 A, with d[rhs] = -z
        let mut d: Vec<f64> = cost.to_vec();
        d.push(0.0);
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb != 0.0 {
                for (dj, t) in d.iter_mut().zip(&self.rows[r]) {
                    *dj -= cb * t;
                }
            }
        }
        let cscale = cost.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let opt_tol = 1e-11 * cscale;
        let max_iter = 50 * (width + self.rows.len()) + 10_000;
        let mut degenerate = 0usize;

        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -opt_tol;
            for (j, &dj) in d.iter().enumerate().take(allowed) {
                if dj < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some(s) = enter else {
                return Ok(-d[rhs]);
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[s];
                if a > PIVOT_TOL {
                    let ratio = row[rhs].max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio, a)),
                        Some((lr, lratio, la)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * lratio.max(1.0);
                            let take = if tie {
                                if bland {
                                    self.basis[r] < self.basis[lr]
                                } else {
                                    a > la
                                }
                            } else {
                                ratio < lratio
                            };
                            if take { Some((r, ratio, a)) } else { Some((lr, lratio, la)) }
                        }
                    };
                }
            }
            let Some((r, ratio, _)) = leave else {
                return Err(Error::Lp("unbounded objective".into()));
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, s, &mut d);
        }
        Err(Error::Lp(format!("dense simplex hit the iteration limit ({max_iter})")))
    }

    fn pivot(&mut self, r: usize, s: usize, d: &mut [f64]) {
        self.pivots += 1;
        let p = self.rows[r][s];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][s] = 1.0;
        let prow = self.rows[r].clone();
        for (q, row) in self.rows.iter_mut().enumerate() {
            if q == r {
                continue;
            }
            let f = row[s];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[s] = 0.0;
            }
        }
        let f = d[s];
        if f != 0.0 {
            for (v, pv) in d.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            d[s] = 0.0;
        }
        self.basis[r] = s;
    }

    /// Pivots remaining zero-level artificials out of the basis; rows where
    /// that is impossible are linearly dependent and are dropped.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        let mut dummy = vec![0.0; self.n + self.n_art + 1];
        while r < self.rows.len() {
            if self.basis[r] >= self.n {
                let col = (0..self.n)
                    .filter(|&j| self.rows[r][j].abs() > PIVOT_TOL)
                    .max_by(|&a, &b| self.rows[r][a].abs().total_cmp(&self.rows[r][b].abs()));
                match col {
                    Some(j) => {
                        self.pivot(r, j, &mut dummy);
                        r += 1;
                    }
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }
}
