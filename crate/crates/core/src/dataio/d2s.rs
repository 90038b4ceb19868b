//! D2S text format.
//!
//! One block per distribution:
//!
//! ```text
//! d                  (or `S <table id>` for symbolic supports)
//! m
//! w_1 ... w_m
//! x_1                (d reals, or one symbol index)
//! ...
//! x_m
//! ```
//!
//! Blocks are concatenated. Reals are written with 17 significant digits.
//! Symbol indices are zero-based rows of the referenced cost table.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use ndarray::Array2;

use crate::distribution::{CostTable, DiscreteDistribution, Support};
use crate::error::{Error, Result};

/// Weight sums off by at most this much are renormalized on read.
pub const READ_SUM_TOL: f64 = 1e-6;

/// Cost tables available to the reader, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct TableRegistry {
    tables: HashMap<String, Arc<CostTable>>,
}

impl TableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, table: CostTable) -> Arc<CostTable> {
        let t = Arc::new(table);
        self.tables.insert(t.id().to_string(), Arc::clone(&t));
        t
    }

    pub fn get(&self, id: &str) -> Option<&Arc<CostTable>> {
        self.tables.get(id)
    }
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
    block: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line, or `None` at end of stream.
    fn next_line(&mut self) -> Result<Option<String>> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            if !l.trim().is_empty() {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }

    fn expect_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?
            .ok_or_else(|| self.err(format!("unexpected end of input, expected {what}")))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { block: self.block, line: self.line, message: message.into() }
    }

    fn reals(&self, l: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
        let v = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(format!("bad number {t:?} in {what}"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != expected {
            return Err(self.err(format!("{what}: expected {expected} values, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.err(format!("non-finite value in {what}")));
        }
        Ok(v)
    }

    fn count(&self, l: &str, what: &str) -> Result<usize> {
        match l.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(self.err(format!("{what} must be a positive integer, got {:?}", l.trim()))),
        }
    }
}

/// Reads every block of a D2S stream. Symbolic blocks are resolved against
/// `tables`.
pub fn read_dataset<R: BufRead>(reader: R, tables: &TableRegistry) -> Result<Vec<DiscreteDistribution>> {
    let mut lines = Lines { inner: reader.lines(), line: 0, block: 0 };
    let mut out = Vec::new();
    while let Some(header) = lines.next_line()? {
        let header = header.trim().to_string();
        let table = match header.strip_prefix('S') {
            Some(rest) if rest.starts_with(char::is_whitespace) => {
                let id = rest.trim();
                Some(
                    tables
                        .get(id)
                        .cloned()
                        .ok_or_else(|| lines.err(format!("unknown cost table {id:?}")))?,
                )
            }
            _ => None,
        };
        let dim = match table {
            Some(_) => 1,
            None => lines.count(&header, "dimension")?,
        };
        let m = {
            let l = lines.expect_line("support size")?;
            lines.count(&l, "support size")?
        };
        let mut weights = {
            let l = lines.expect_line("weights")?;
            lines.reals(&l, m, "weights")?
        };
        if weights.iter().any(|w| *w < 0.0) {
            return Err(lines.err("negative weight"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > READ_SUM_TOL {
            return Err(Error::WeightSum { block: lines.block, sum });
        }
        weights.iter_mut().for_each(|w| *w /= sum);

        let support = match table {
            Some(table) => {
                let mut indices = Vec::with_capacity(m);
                for _ in 0..m {
                    let l = lines.expect_line("symbol index")?;
                    let idx: usize = l
                        .trim()
                        .parse()
                        .map_err(|_| lines.err(format!("bad symbol index {:?}", l.trim())))?;
                    if idx >= table.len() {
                        return Err(lines.err(format!("symbol {idx} outside table of size {}", table.len())));
                    }
                    indices.push(idx);
                }
                Support::Symbolic { table, indices }
            }
            None => {
                let mut coords = Vec::with_capacity(m * dim);
                for _ in 0..m {
                    let l = lines.expect_line("support vector")?;
                    coords.extend(lines.reals(&l, dim, "support vector")?);
                }
                Support::Vectors(Array2::from_shape_vec((m, dim), coords).expect("shape checked"))
            }
        };
        let d = DiscreteDistribution::from_parts(weights, support).map_err(|e| lines.err(e.to_string()))?;
        out.push(d);
        lines.block += 1;
    }
    Ok(out)
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_dataset<W: Write>(mut writer: W, data: &[DiscreteDistribution]) -> Result<()> {
    for p in data {
        match p.support() {
            Support::Vectors(x) => writeln!(writer, "{}", x.ncols())?,
            Support::Symbolic { table, .. } => writeln!(writer, "S {}", table.id())?,
        }
        writeln!(writer, "{}", p.len())?;
        let w: Vec<String> = p.weights().iter().map(|v| real(*v)).collect();
        writeln!(writer, "{}", w.join(" "))?;
        match p.support() {
            Support::Vectors(x) => {
                for row in x.rows() {
                    let r: Vec<String> = row.iter().map(|v| real(*v)).collect();
                    writeln!(writer, "{}", r.join(" "))?;
                }
            }
            Support::Symbolic { indices, .. } => {
                for i in indices {
                    writeln!(writer, "{i}")?;
                }
            }
        }
    }
    Ok(())
}

/// Reads a cost table file: `S k` followed by `k` rows of `k` reals.
pub fn read_cost_table<R: BufRead>(reader: R, id: &str) -> Result<CostTable> {
    let mut lines = Lines { inner: reader.lines(), line: 0, block: 0 };
    let header = lines.expect_line("cost table header")?;
    let k = match header.trim().strip_prefix('S') {
        Some(rest) => lines.count(rest, "table size")?,
        None => return Err(lines.err("cost table header must be `S k`")),
    };
    let mut costs = Vec::with_capacity(k * k);
    for _ in 0..k {
        let l = lines.expect_line("cost table row")?;
        costs.extend(lines.reals(&l, k, "cost table row")?);
    }
    CostTable::new(id, Array2::from_shape_vec((k, k), costs).expect("shape checked"))
}

pub fn write_cost_table<W: Write>(mut writer: W, table: &CostTable) -> Result<()> {
    writeln!(writer, "S {}", table.len())?;
    for row in table.costs().rows() {
        let r: Vec<String> = row.iter().map(|v| real(*v)).collect();
        writeln!(writer, "{}", r.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Vec<DiscreteDistribution>> {
        read_dataset(s.as_bytes(), &TableRegistry::new())
    }

    fn roundtrip(data: &[DiscreteDistribution], tables: &TableRegistry) -> Vec<DiscreteDistribution> {
        let mut buf = Vec::new();
        write_dataset(&mut buf, data).unwrap();
        read_dataset(buf.as_slice(), tables).unwrap()
    }

    #[test]
    fn reads_one_dimensional_block() {
        let d = read("1\n2\n0.5 0.5\n0.0\n3.0\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].weights(), &[0.5, 0.5]);
        assert_eq!(d[0].points().unwrap().column(0).to_vec(), vec![0.0, 3.0]);
        assert_eq!(roundtrip(&d, &TableRegistry::new()), d);
    }

    #[test]
    fn empty_stream() {
        assert!(read("").unwrap().is_empty());
        assert!(read("\n\n").unwrap().is_empty());
    }

    #[test]
    fn weight_sum_violation_names_the_block() {
        let err = read("1\n1\n1.0\n0.0\n1\n2\n0.45 0.45\n0.0\n3.0\n").unwrap_err();
        match err {
            Error::WeightSum { block, sum } => {
                assert_eq!(block, 1);
                assert!((sum - 0.9).abs() < 1e-12);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn small_drift_is_renormalized() {
        let d = read("1\n2\n0.5 0.5000005\n0.0\n3.0\n").unwrap();
        assert!((d[0].weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn malformed_blocks_report_position() {
        let err = read("2\n2\n0.5 0.5\n0.0 1.0\n3.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { block: 0, line: 5, .. }), "{err:?}");
        let err = read("1\n2\n0.5 0.5\n0.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { block: 0, .. }));
        let err = read("x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn roundtrip_is_exact_for_awkward_values() {
        let p = DiscreteDistribution::from_flat(
            vec![1.0 / 3.0, 2.0 / 3.0],
            2,
            vec![0.1, -1e-300, std::f64::consts::PI, 12345.678901234567],
        )
        .unwrap();
        let back = roundtrip(std::slice::from_ref(&p), &TableRegistry::new());
        assert_eq!(back[0], p);
    }

    #[test]
    fn symbolic_blocks_roundtrip() {
        let table = CostTable::new("aa", ndarray::array![[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let mut reg = TableRegistry::new();
        let t = reg.insert(table.clone());
        let p = DiscreteDistribution::symbolic(vec![0.25, 0.75], t, vec![1, 0]).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, std::slice::from_ref(&p)).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("S aa\n2\n"));
        assert_eq!(read_dataset(buf.as_slice(), &reg).unwrap()[0], p);
        // unknown table
        assert!(read_dataset(buf.as_slice(), &TableRegistry::new()).is_err());

        let mut tb = Vec::new();
        write_cost_table(&mut tb, &table).unwrap();
        assert_eq!(read_cost_table(tb.as_slice(), "aa").unwrap(), table);
    }
}
