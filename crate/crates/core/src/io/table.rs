//! Rectangular tables and their CSV form.
//!
//! Floats are written with 17 significant digits so every value parses back
//! to the same bits. Infinities and NaN become `inf`, `-inf` and `nan`.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// A named table; the name becomes the file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    /// Column names with units in brackets.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics on a width mismatch, which is a programming error.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name || c.split(" [").next() == Some(name))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let wrap = |e: csv::Error| Error::Csv { path: self.name.clone().into(), source: e };
        w.write_record(&self.columns).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| Error::Io { path: self.name.clone().into(), source: e.into_error() })
    }
}

/// Writes `table` to `path` as CSV.
pub fn export_csv(table: &Table, path: &Path) -> Result<()> {
    let bytes = table.to_csv_bytes()?;
    std::fs::write(path, bytes).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, 0.1, 1e-300, -2.5e17, 5e-324, f64::MAX] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        let third = format_float(1.0 / 3.0);
        let digits = third.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count();
        assert_eq!(digits, 17);
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("empty", &["phi [BTC/record]", "records [records/day]"]);
        assert_eq!(t.to_csv_bytes().unwrap(), b"phi [BTC/record],records [records/day]\n");
    }

    #[test]
    fn rows_use_lf() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Cell::from(1.0), Cell::from("x")]);
        t.push(vec![Cell::from(f64::INFINITY), Cell::from(3u64)]);
        let s = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(s, "a,b\n1.0000000000000000e0,x\ninf,3\n");
        assert_eq!(t.column("b"), Some(1));
    }

    #[test]
    fn export_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = Table::new("t", &["a"]);
        export_csv(&t, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"a\n");
        assert!(export_csv(&t, &dir.path().join("missing/t.csv")).is_err());
    }
}
