//! Trace datasets: one CSV per source plus a JSON manifest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::io::Table;
use crate::{Error, Result};

pub const COLUMNS: [&str; 9] = ["tau", "x1", "x2", "x3", "u", "u_t", "u_tt", "v", "v_t"];
pub const SCHEMA: &str = "conewave-traces/1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub tau: f64,
    pub x: [f64; 3],
    pub u: f64,
    pub u_t: f64,
    pub u_tt: f64,
    pub v: f64,
    pub v_t: f64,
}

impl TraceRow {
    fn cells(&self) -> Vec<f64> {
        vec![self.tau, self.x[0], self.x[1], self.x[2], self.u, self.u_t, self.u_tt, self.v, self.v_t]
    }

    fn from_cells(c: &[f64]) -> TraceRow {
        TraceRow { tau: c[0], x: [c[1], c[2], c[3]], u: c[4], u_t: c[5], u_tt: c[6], v: c[7], v_t: c[8] }
    }

    pub fn values(&self) -> [f64; 5] {
        [self.u, self.u_t, self.u_tt, self.v, self.v_t]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceTraces {
    pub xi: [f64; 3],
    pub rows: Vec<TraceRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceDataset {
    pub grid: GridSpec,
    pub n: usize,
    pub preset_hash: String,
    pub sources: Vec<SourceTraces>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    schema: String,
    grid: GridSpec,
    n: usize,
    preset_hash: String,
    sources: Vec<SourceEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceEntry {
    xi: [f64; 3],
    file: String,
    rows: usize,
}

impl TraceDataset {
    pub fn table(&self, i: usize) -> Table {
        let s = &self.sources[i];
        let mut t = Table::new(&COLUMNS)
            .meta("schema", SCHEMA)
            .meta("source", i)
            .meta("xi", format!("{:?}", s.xi))
            .meta("n", self.n)
            .meta("preset_hash", &self.preset_hash);
        for r in &s.rows {
            t.push(r.cells());
        }
        t
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut entries = Vec::new();
        for (i, s) in self.sources.iter().enumerate() {
            let file = format!("source_{i}.csv");
            self.table(i).write(&dir.join(&file))?;
            entries.push(SourceEntry { xi: s.xi, file, rows: s.rows.len() });
        }
        let m = Manifest {
            schema: SCHEMA.into(),
            grid: self.grid,
            n: self.n,
            preset_hash: self.preset_hash.clone(),
            sources: entries,
        };
        let text = serde_json::to_string_pretty(&m).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<TraceDataset> {
        let text = fs::read_to_string(dir.join("manifest.json"))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Data(format!("manifest: {e}")))?;
        if m.schema != SCHEMA {
            return Err(Error::Data(format!("unsupported dataset schema {:?}", m.schema)));
        }
        let mut sources = Vec::new();
        for e in &m.sources {
            let t = Table::read(&dir.join(&e.file))?;
            if t.columns != COLUMNS {
                return Err(Error::Data(format!("{}: unexpected columns {:?}", e.file, t.columns)));
            }
            if t.rows.len() != e.rows {
                return Err(Error::Data(format!("{}: {} rows, manifest says {}", e.file, t.rows.len(), e.rows)));
            }
            sources.push(SourceTraces { xi: e.xi, rows: t.rows.iter().map(|c| TraceRow::from_cells(c)).collect() });
        }
        Ok(TraceDataset { grid: m.grid, n: m.n, preset_hash: m.preset_hash, sources })
    }

    /// Relative L2 difference of the trace values, row by row.
    pub fn relative_difference(&self, other: &TraceDataset) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        if self.sources.len() != other.sources.len() {
            return Err(Error::Data("datasets have different source lists".into()));
        }
        for (a, b) in self.sources.iter().zip(&other.sources) {
            if a.rows.len() != b.rows.len() {
                return Err(Error::Data("datasets have different row layouts".into()));
            }
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                for (x, y) in ra.values().iter().zip(rb.values()) {
                    num += (x - y) * (x - y);
                    den += x * x;
                }
            }
        }
        Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_round_trip_is_bit_exact() {
        let ds = TraceDataset {
            grid: GridSpec::new(2.0, 16, 1.0),
            n: 0,
            preset_hash: "abc".into(),
            sources: vec![SourceTraces {
                xi: [2.0, 0.1, 0.0],
                rows: vec![TraceRow { tau: -0.5, x: [0.1, 0.2, 1.0 / 3.0], u: 1e-17, u_t: -2.5, u_tt: 0.0, v: 7.0, v_t: 0.1 + 0.2 }],
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        ds.write_dir(dir.path()).unwrap();
        assert_eq!(TraceDataset::read_dir(dir.path()).unwrap(), ds);
    }
}
