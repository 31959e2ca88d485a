//! Output sinks and number formatting shared by the subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// File named by `--out`, else standard output.
pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Plain decimals for moderate magnitudes, shortest scientific form otherwise.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e6).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A table as CSV (header plus rows) or a JSON array of objects.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => serde_json::json!(v),
            Cell::Int(v) => serde_json::json!(v),
            Cell::Bool(v) => serde_json::json!(v),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::csv))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| self.columns.iter().map(|c| c.to_string()).zip(r.iter().map(Cell::json)).collect())
                    .collect();
                serde_json::to_writer_pretty(&mut *out, &rows)?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn emit_table(table: &Table, out: Option<&PathBuf>, format: Format) -> Result<()> {
    let mut w = sink(out.map(PathBuf::as_path))?;
    table.write(&mut w, format)?;
    w.flush()?;
    Ok(())
}

pub fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let mut w = sink(out.map(PathBuf::as_path))?;
    write_json(&mut w, value)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_forms() {
        assert_eq!(num(1029.5), "1029.5");
        assert_eq!(num(1.1e23), "1.1e23");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(2.5e-5), "2.5e-5");
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Num(1e9), Cell::Text("x".into())]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1e9,x\n");
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["a"], 1e9);
    }
}
