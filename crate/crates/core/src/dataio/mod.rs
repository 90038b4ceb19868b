//! Reading and writing datasets, and the synthetic generator.

mod d2s;
mod synth;

pub use d2s::{read_cost_table, read_dataset, write_cost_table, write_dataset, TableRegistry, READ_SUM_TOL};
pub use synth::{generate_synthetic, SynthData, SynthSpec};

use crate::error::{Error, Result};

/// Reads one label per line.
pub fn read_labels<R: std::io::BufRead>(reader: R) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, l) in reader.lines().enumerate() {
        let l = l?;
        let t = l.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|_| Error::Parse {
            block: 0,
            line: i + 1,
            message: format!("bad label {t:?}"),
        })?);
    }
    Ok(out)
}

pub fn write_labels<W: std::io::Write>(mut writer: W, labels: &[usize]) -> Result<()> {
    for l in labels {
        writeln!(writer, "{l}")?;
    }
    Ok(())
}
