//! Tabular reports: a key/value header plus named tables, written as CSV or
//! JSON. Floats are printed in shortest round-trip form in files and with two
//! decimals on the terminal.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ledger::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Money(Money),
    Empty,
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Float(x) => float_text(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Money(m) => m.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => {
                let s = format!("{x:.2}");
                // tiny negatives would otherwise print as "-0.00"
                if s == "-0.00" {
                    "0.00".into()
                } else {
                    s
                }
            }
            other => other.machine(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Float(x) if x.is_finite() => float_text(*x),
            Cell::Float(_) | Cell::Empty => "null".into(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => json_string(s),
            Cell::Money(m) => json_string(&m.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<Money> for Cell {
    fn from(m: Money) -> Self {
        Cell::Money(m)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Shortest decimal text that parses back to the same `f64`.
fn float_text(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        x.to_string()
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

/// A column and the engine operation that produces its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub source: &'static str,
}

pub const fn col(name: &'static str, source: &'static str) -> Column {
    Column { name, source }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: Vec<Column>) -> Self {
        Table {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::machine))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 is utf-8"))
    }

    fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (c, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}:{}", json_string(c.name), cell.json());
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    /// Fixed-width rendering with two-decimal floats.
    pub fn to_human(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::human).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([c.name.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("== {} ==\n", self.name);
        let header: Vec<String> = self
            .columns
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{:>w$}", c.name, w = w))
            .collect();
        out.push_str(header.join("  ").trim_end());
        out.push('\n');
        for r in &cells {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{:>w$}", s, w = w))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub header: Vec<(String, String)>,
    pub tables: Vec<Table>,
    /// Extra files written verbatim (name, contents).
    pub attachments: Vec<(String, String)>,
}

impl Report {
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.header.push((key.into(), value.into()));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn header_with_provenance(&self) -> Vec<(String, String)> {
        let mut rows = self.header.clone();
        for t in &self.tables {
            for c in &t.columns {
                rows.push((format!("column.{}.{}", t.name, c.name), c.source.to_string()));
            }
        }
        rows
    }

    fn header_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value"])?;
        for (k, v) in self.header_with_provenance() {
            w.write_record([k, v])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 is utf-8"))
    }

    fn header_json(&self) -> String {
        let mut out = String::from("{\n");
        let rows = self.header_with_provenance();
        for (i, (k, v)) in rows.iter().enumerate() {
            let _ = write!(out, "  {}:{}", json_string(k), json_string(v));
            out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
        }
        out.push_str("}\n");
        out
    }

    /// Write `header.<ext>`, one `<table>.<ext>` per table, and the
    /// attachments into `dir`. Returns the paths written, in order.
    pub fn write(&self, dir: &Path, format: Format) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let ext = format.extension();
        let mut written = Vec::new();
        let header = match format {
            Format::Csv => self.header_csv()?,
            Format::Json => self.header_json(),
        };
        let path = dir.join(format!("header.{ext}"));
        fs::write(&path, header)?;
        written.push(path);
        for t in &self.tables {
            let body = match format {
                Format::Csv => t.to_csv()?,
                Format::Json => t.to_json(),
            };
            let path = dir.join(format!("{}.{ext}", t.name));
            fs::write(&path, body)?;
            written.push(path);
        }
        for (name, body) in &self.attachments {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn to_human(&self) -> String {
        self.tables
            .iter()
            .map(Table::to_human)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec![col("x", "op_x"), col("label", "op_label")]);
        t.push(vec![Cell::Float(1086.7768595041323), "a,b".into()]);
        t.push(vec![Cell::Float(0.1), Cell::Empty]);
        t
    }

    #[test]
    fn csv_quotes_and_full_precision() {
        let csv = sample().to_csv().unwrap();
        assert_eq!(csv, "x,label\n1086.7768595041323,\"a,b\"\n0.1,\n");
    }

    #[test]
    fn json_rows_share_column_names() {
        let json = sample().to_json();
        assert_eq!(
            json,
            "[\n  {\"x\":1086.7768595041323,\"label\":\"a,b\"},\n  {\"x\":0.1,\"label\":null}\n]\n"
        );
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["x"], 1086.7768595041323);
    }

    #[test]
    fn human_uses_two_decimals() {
        let h = sample().to_human();
        assert!(h.contains("1086.78"));
        assert!(!h.contains("1086.7768"));
    }

    #[test]
    fn header_lists_column_sources() {
        let mut r = Report::default();
        r.set("tool", "coopval");
        r.tables.push(sample());
        let csv = r.header_csv().unwrap();
        assert!(csv.contains("column.demo.x,op_x"));
        let json: serde_json::Value = serde_json::from_str(&r.header_json()).unwrap();
        assert_eq!(json["tool"], "coopval");
    }
}
