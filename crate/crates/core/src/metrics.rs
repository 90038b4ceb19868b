//! External clustering indices computed from a contingency table.
//!
//! Degenerate conventions: ARI and AMI are 1 when both partitions are a
//! single block; AMI uses the max-entropy normalization; homogeneity and
//! completeness are 1 when the entropy they divide by is zero.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Counts of (true class, predicted cluster) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != c) {
            return Err(Error::InvalidParameter("ragged contingency table".into()));
        }
        let n = counts.iter().flatten().sum();
        Ok(Self { counts, n })
    }

    /// Builds the table from two label vectors. Rows and columns follow the
    /// order of first appearance of each label.
    pub fn from_labels<A, B>(truth: &[A], pred: &[B]) -> Result<Self>
    where
        A: std::hash::Hash + Eq,
        B: std::hash::Hash + Eq,
    {
        if truth.len() != pred.len() {
            return Err(Error::DimensionMismatch { expected: truth.len(), found: pred.len() });
        }
        let mut rows: HashMap<&A, usize> = HashMap::new();
        let mut cols: HashMap<&B, usize> = HashMap::new();
        let mut cells = Vec::with_capacity(truth.len());
        for (a, b) in truth.iter().zip(pred) {
            let r = rows.len();
            let r = *rows.entry(a).or_insert(r);
            let c = cols.len();
            let c = *cols.entry(b).or_insert(c);
            cells.push((r, c));
        }
        let mut counts = vec![vec![0u64; cols.len()]; rows.len()];
        for (r, c) in cells {
            counts[r][c] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).filter(|s| *s > 0).collect()
    }

    fn col_sums(&self) -> Vec<u64> {
        let c = self.counts.first().map_or(0, Vec::len);
        (0..c)
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .filter(|s| *s > 0)
            .collect()
    }

    fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().flatten().copied().filter(|v| *v > 0)
    }
}

fn comb2(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index.
pub fn ari(t: &ContingencyTable) -> Result<f64> {
    if t.n < 2 {
        return Err(Error::InvalidParameter("ARI needs at least two items".into()));
    }
    let index: f64 = t.cells().map(comb2).sum();
    let a: f64 = t.row_sums().into_iter().map(comb2).sum();
    let b: f64 = t.col_sums().into_iter().map(comb2).sum();
    let expected = a * b / comb2(t.n);
    let max = 0.5 * (a + b);
    if max == expected {
        // both partitions single-block (or both all singletons)
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n as f64;
    let a = t.counts.iter().map(|r| r.iter().sum::<u64>()).collect::<Vec<_>>();
    let c = t.counts.first().map_or(0, Vec::len);
    let b: Vec<u64> = (0..c).map(|j| t.counts.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (a[i] as f64 * b[j] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Expected mutual information of two random partitions with the given
/// block sizes under the hypergeometric model.
pub fn expected_mutual_information(a: &[u64], b: &[u64], n: u64) -> f64 {
    // ln k! for k = 0..=n
    let mut lf = vec![0.0f64; n as usize + 1];
    for k in 1..=n as usize {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in a {
        for &bj in b {
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            let fixed = lf[ai as usize] + lf[bj as usize] + lf[(n - ai) as usize] + lf[(n - bj) as usize]
                - lf[n as usize];
            for nij in lo..=hi {
                let x = nij as f64;
                let log_p = fixed
                    - lf[nij as usize]
                    - lf[(ai - nij) as usize]
                    - lf[(bj - nij) as usize]
                    - lf[(n + nij - ai - bj) as usize];
                emi += x / nf * (nf * x / (ai as f64 * bj as f64)).ln() * log_p.exp();
            }
        }
    }
    emi
}

fn is_matching(t: &ContingencyTable) -> bool {
    let rows_ok = t.counts.iter().all(|r| r.iter().filter(|v| **v > 0).count() <= 1);
    let c = t.counts.first().map_or(0, Vec::len);
    let cols_ok = (0..c).all(|j| t.counts.iter().filter(|r| r[j] > 0).count() <= 1);
    rows_ok && cols_ok
}

/// Adjusted mutual information with max-entropy normalization.
///
/// When the normalizer vanishes (for instance both partitions single-block,
/// or both all singletons) the result is 1 if the partitions agree up to
/// relabeling and 0 otherwise.
pub fn ami(t: &ContingencyTable) -> Result<f64> {
    if t.n < 2 {
        return Err(Error::InvalidParameter("AMI needs at least two items".into()));
    }
    let a = t.row_sums();
    let b = t.col_sums();
    if a.len() == 1 && b.len() == 1 {
        return Ok(1.0);
    }
    let n = t.n as f64;
    let mi = mutual_information(t);
    let emi = expected_mutual_information(&a, &b, t.n);
    let h = entropy(&a, n).max(entropy(&b, n));
    let denom = h - emi;
    if denom.abs() <= 1e-12 * h.max(1.0) {
        return Ok(if is_matching(t) { 1.0 } else { 0.0 });
    }
    if is_matching(t) && a.len() == b.len() {
        return Ok(1.0);
    }
    Ok((mi - emi) / denom)
}

/// `(homogeneity, completeness)`.
pub fn homogeneity_completeness(t: &ContingencyTable) -> Result<(f64, f64)> {
    if t.n == 0 {
        return Err(Error::InvalidParameter("empty labelling".into()));
    }
    let n = t.n as f64;
    let mi = mutual_information(t);
    let hc = entropy(&t.row_sums(), n);
    let hk = entropy(&t.col_sums(), n);
    // H(C|K) = H(C) - I and H(K|C) = H(K) - I
    let h = if hc <= 0.0 { 1.0 } else { (mi / hc).clamp(0.0, 1.0) };
    let c = if hk <= 0.0 { 1.0 } else { (mi / hk).clamp(0.0, 1.0) };
    Ok((h, c))
}
