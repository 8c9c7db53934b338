//! CSV report and run-manifest serialization.
//!
//! Column orders and headers are a public contract; numbers are written
//! with 17 significant digits so reports round-trip bitwise.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

/// 17 significant digits; enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvReport {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvReport {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a std::collections::BTreeMap<String, String>,
    seed: u64,
    version: &'a str,
    wall_time_seconds: f64,
    outputs: Vec<String>,
}

/// Resolved-config echo plus provenance; enough to replay the run.
pub fn write_manifest(
    path: &Path,
    config: &RunConfig,
    seed: u64,
    wall_time: Duration,
    outputs: &[String],
) -> Result<()> {
    let manifest = Manifest {
        config: config.entries(),
        seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: wall_time.as_secs_f64(),
        outputs: outputs.to_vec(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}
