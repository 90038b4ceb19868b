//! Transportation simplex (MODI / stepping-stone) with a Bland fallback.
//!
//! The basis is a spanning tree over the `m + n` row and column nodes with
//! exactly `m + n - 1` basic cells, some of which may carry zero flow.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

pub(crate) struct Solution {
    pub flow: Array2<f64>,
    pub row_duals: Vec<f64>,
    pub col_duals: Vec<f64>,
}

struct Tree {
    m: usize,
    n: usize,
    /// basic cells as (row, col)
    cells: Vec<(usize, usize)>,
    flow: Array2<f64>,
}

impl Tree {
    /// Least-cost start: allocate greedily in order of increasing cost,
    /// crossing out exactly one row or column per allocation (both on the
    /// last one), which always yields a spanning tree.
    fn least_cost(cost: &Array2<f64>, supply: &[f64], demand: &[f64]) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut order: Vec<(f64, usize)> = cost.iter().copied().zip(0..).collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let mut row_open = vec![true; m];
        let mut col_open = vec![true; n];
        let (mut rows_left, mut cols_left) = (m, n);
        let mut flow = Array2::zeros((m, n));
        let mut cells = Vec::with_capacity(m + n - 1);
        for (_, k) in order {
            let (i, j) = (k / n, k % n);
            if !row_open[i] || !col_open[j] {
                continue;
            }
            let x = s[i].min(d[j]).max(0.0);
            flow[[i, j]] = x;
            cells.push((i, j));
            s[i] -= x;
            d[j] -= x;
            if rows_left == 1 && cols_left == 1 {
                break;
            }
            let cross_row = if rows_left == 1 {
                false
            } else if cols_left == 1 {
                true
            } else {
                s[i] <= d[j]
            };
            if cross_row {
                row_open[i] = false;
                rows_left -= 1;
            } else {
                col_open[j] = false;
                cols_left -= 1;
            }
        }
        debug_assert_eq!(cells.len(), m + n - 1);
        Tree { m, n, cells, flow }
    }
}

/// Rooted view of the basis tree, rebuilt after every pivot into reused
/// buffers. Rows are nodes `0..m`, columns `m..m+n`; node 0 is the root.
struct Rooted {
    offsets: Vec<usize>,
    fill: Vec<usize>,
    tail: Vec<usize>,
    adj: Vec<(usize, usize)>,
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
    pot: Vec<f64>,
    queue: Vec<usize>,
}

impl Rooted {
    fn new(nodes: usize) -> Self {
        Self {
            offsets: vec![0; nodes + 1],
            fill: vec![0; nodes + 1],
            tail: Vec::with_capacity(nodes),
            adj: vec![(0, 0); 2 * nodes],
            parent: vec![usize::MAX; nodes],
            parent_edge: vec![usize::MAX; nodes],
            depth: vec![0; nodes],
            pot: vec![0.0; nodes],
            queue: Vec::with_capacity(nodes),
        }
    }

    /// Rebuilds parents, depths and potentials `u_i + v_j = c_ij` on basic
    /// cells, with `u_0 = 0`.
    fn rebuild(&mut self, tree: &Tree, cost: &Array2<f64>) {
        let m = tree.m;
        let nodes = tree.m + tree.n;
        self.offsets.iter_mut().for_each(|o| *o = 0);
        for &(i, j) in &tree.cells {
            self.offsets[i + 1] += 1;
            self.offsets[m + j + 1] += 1;
        }
        for k in 0..nodes {
            self.offsets[k + 1] += self.offsets[k];
        }
        self.fill.copy_from_slice(&self.offsets);
        for (e, &(i, j)) in tree.cells.iter().enumerate() {
            self.adj[self.fill[i]] = (m + j, e);
            self.fill[i] += 1;
            self.adj[self.fill[m + j]] = (i, e);
            self.fill[m + j] += 1;
        }
        self.parent.iter_mut().for_each(|p| *p = usize::MAX);
        self.queue.clear();
        self.queue.push(0);
        self.parent[0] = 0;
        self.depth[0] = 0;
        self.pot[0] = 0.0;
        let mut head = 0;
        while head < self.queue.len() {
            let node = self.queue[head];
            head += 1;
            for k in self.offsets[node]..self.offsets[node + 1] {
                let (next, e) = self.adj[k];
                if self.parent[next] == usize::MAX {
                    let (i, j) = tree.cells[e];
                    self.parent[next] = node;
                    self.parent_edge[next] = e;
                    self.depth[next] = self.depth[node] + 1;
                    self.pot[next] = cost[[i, j]] - self.pot[node];
                    self.queue.push(next);
                }
            }
        }
    }

    /// Basic-cell indices on the tree path from column node `col` to row
    /// node `row`, in walking order.
    fn path(&mut self, m: usize, row: usize, col: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut tail = std::mem::take(&mut self.tail);
        tail.clear();
        let (mut a, mut b) = (m + col, row);
        while self.depth[a] > self.depth[b] {
            out.push(self.parent_edge[a]);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            tail.push(self.parent_edge[b]);
            b = self.parent[b];
        }
        while a != b {
            out.push(self.parent_edge[a]);
            a = self.parent[a];
            tail.push(self.parent_edge[b]);
            b = self.parent[b];
        }
        out.extend(tail.iter().rev());
        self.tail = tail;
    }
}

/// Solves `min <C, P>` over couplings with row sums `supply` and column sums
/// `demand`. Both marginals must already carry equal mass.
pub(crate) fn solve(cost: &Array2<f64>, supply: &[f64], demand: &[f64]) -> Result<Solution> {
    let (m, n) = cost.dim();
    let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let opt_tol = 1e-13 * scale;
    let mut tree = Tree::least_cost(cost, supply, demand);
    let max_iter = 64 * (m + n) * (m + n) + 1000;
    let mut degenerate = 0usize;
    let mut rooted = Rooted::new(m + n);
    let mut path = Vec::with_capacity(m + n);
    let mut cursor = 0usize;
    let contiguous = cost.as_standard_layout();
    let flat = contiguous.as_slice().expect("standard layout");

    for _ in 0..max_iter {
        rooted.rebuild(&tree, cost);
        let (u, v) = rooted.pot.split_at(m);

        let bland = degenerate >= DEGENERATE_STREAK;
        let entering = if bland {
            first_negative(flat, u, v, opt_tol)
        } else {
            block_pricing(flat, u, v, opt_tol, &mut cursor)
        };
        let Some((ei, ej)) = entering else {
            let (row_duals, col_duals) = tighten_zero_mass_duals(cost, supply, demand, u.to_vec(), v.to_vec());
            return Ok(Solution {
                flow: tree.flow,
                row_duals,
                col_duals,
            });
        };

        // Cycle: entering cell (+), then path cells from column ej to row ei
        // with alternating signs starting at (-).
        rooted.path(m, ei, ej, &mut path);
        let mut theta = f64::INFINITY;
        let mut leave_pos = usize::MAX;
        for (pos, &e) in path.iter().enumerate().filter(|(p, _)| p % 2 == 0) {
            let (i, j) = tree.cells[e];
            let f = tree.flow[[i, j]];
            let better = if f < theta {
                true
            } else if f == theta && bland {
                let (li, lj) = tree.cells[path[leave_pos]];
                (i, j) < (li, lj)
            } else {
                false
            };
            if better {
                theta = f;
                leave_pos = pos;
            }
        }
        let theta = theta.max(0.0);
        if theta == 0.0 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        for (pos, &e) in path.iter().enumerate() {
            let (i, j) = tree.cells[e];
            if pos % 2 == 0 {
                tree.flow[[i, j]] = (tree.flow[[i, j]] - theta).max(0.0);
            } else {
                tree.flow[[i, j]] += theta;
            }
        }
        tree.flow[[ei, ej]] = theta;
        let leaving = path[leave_pos];
        let (li, lj) = tree.cells[leaving];
        tree.flow[[li, lj]] = 0.0;
        tree.cells[leaving] = (ei, ej);
    }
    Err(Error::Lp(format!(
        "transportation simplex hit the iteration limit ({max_iter})"
    )))
}

/// Lexicographically first cell with negative reduced cost (Bland).
fn first_negative(cost: &[f64], u: &[f64], v: &[f64], tol: f64) -> Option<(usize, usize)> {
    let n = v.len();
    for (i, &ui) in u.iter().enumerate() {
        let row = &cost[i * n..(i + 1) * n];
        for (j, (&c, &vj)) in row.iter().zip(v).enumerate() {
            if c - ui - vj < -tol {
                return Some((i, j));
            }
        }
    }
    None
}

/// Partial pricing: scans cells cyclically from `cursor` in blocks of about
/// `sqrt(mn)` and returns the most negative reduced cost of the first block
/// that has one. `None` only after a full pass without candidates.
fn block_pricing(cost: &[f64], u: &[f64], v: &[f64], tol: f64, cursor: &mut usize) -> Option<(usize, usize)> {
    let n = v.len();
    let total = u.len() * n;
    let block = ((total as f64).sqrt() as usize).max(16);
    let mut best = -tol;
    let mut entering = None;
    let mut k = *cursor;
    for scanned in 1..=total {
        let (i, j) = (k / n, k % n);
        let r = cost[k] - u[i] - v[j];
        if r < best {
            best = r;
            entering = Some((i, j));
        }
        k += 1;
        if k == total {
            k = 0;
        }
        if entering.is_some() && (scanned % block == 0 || scanned == total) {
            break;
        }
    }
    *cursor = k;
    entering
}

/// Rows or columns with zero mass have non-unique duals; pin each to the
/// largest value that keeps the dual feasible.
fn tighten_zero_mass_duals(
    cost: &Array2<f64>,
    supply: &[f64],
    demand: &[f64],
    mut u: Vec<f64>,
    mut v: Vec<f64>,
) -> (Vec<f64>, Vec<f64>) {
    for (i, &a) in supply.iter().enumerate() {
        if a == 0.0 {
            u[i] = (0..v.len())
                .map(|j| cost[[i, j]] - v[j])
                .fold(f64::INFINITY, f64::min);
        }
    }
    for (j, &b) in demand.iter().enumerate() {
        if b == 0.0 {
            v[j] = (0..u.len())
                .map(|i| cost[[i, j]] - u[i])
                .fold(f64::INFINITY, f64::min);
        }
    }
    (u, v)
}
