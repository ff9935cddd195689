//! Comma-separated tables with a `#` manifest block.
//!
//! Layout:
//!
//! ```text
//! # key: value
//! # key: value
//! col1,col2,...
//! 1.0000000000000000e0,...
//! ```
//!
//! Floats are written with `{:.16e}` (17 significant digits) so that a
//! write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub manifest: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table { manifest: Vec::new(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Table {
        self.set_meta(key, value);
        self
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string().replace('\n', " ");
        match self.manifest.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = v,
            None => self.manifest.push((key.to_string(), v)),
        }
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.manifest.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.manifest {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&v| fmt_f64(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Table> {
        let mut t = Table::default();
        let mut header = false;
        for (ln, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix('#') {
                if header {
                    return Err(Error::Data(format!("line {}: manifest entry after the header", ln + 1)));
                }
                let m = m.trim_start();
                let (k, v) = m
                    .split_once(": ")
                    .or_else(|| m.split_once(':'))
                    .ok_or_else(|| Error::Data(format!("line {}: manifest entry without ':'", ln + 1)))?;
                t.manifest.push((k.trim().to_string(), v.to_string()));
            } else if !header {
                t.columns = line.split(',').map(|s| s.trim().to_string()).collect();
                header = true;
            } else if !line.is_empty() {
                let row: Vec<f64> = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Data(format!("line {}: {e}", ln + 1))))
                    .collect::<Result<_>>()?;
                if row.len() != t.columns.len() {
                    return Err(Error::Data(format!(
                        "line {}: {} cells for {} columns",
                        ln + 1,
                        row.len(),
                        t.columns.len()
                    )));
                }
                t.rows.push(row);
            }
        }
        if !header {
            return Err(Error::Data("table without header row".into()));
        }
        Ok(t)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(p) = path.parent() {
            fs::create_dir_all(p)?;
        }
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Table> {
        Table::from_csv(&fs::read_to_string(path)?)
    }
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut t = Table::new(&["a", "b"]).meta("schema", "1").meta("note", "x: y");
        t.push(vec![0.1 + 0.2, -1e-300]);
        t.push(vec![f64::MIN_POSITIVE, 1.0 / 3.0]);
        let back = Table::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        for (r, s) in t.rows.iter().zip(&back.rows) {
            for (x, y) in r.iter().zip(s) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(Table::from_csv("a,b\n1,2,3\n").is_err());
    }
}
