//! Tables with a metadata header, written as `#`-prefixed CSV or as JSON.
//!
//! Cells are stored as their text so that extended-exponent values such as
//! `3.2e-2160` pass through both formats unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::args::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct JsonOut<'a> {
    metadata: BTreeMap<&'a str, &'a str>,
    columns: &'a [String],
    rows: Vec<Vec<Box<RawValue>>>,
}

#[derive(Deserialize)]
struct JsonIn {
    metadata: BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<Vec<Box<RawValue>>>,
}

/// Shortest round-trip scientific form, valid as a JSON number.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "null".to_string()
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (key, value) in &self.metadata {
            writeln!(w, "# {key}: {value}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| RawValue::from_string(cell.clone()).map_err(io::Error::other))
                    .collect::<io::Result<Vec<_>>>()
            })
            .collect::<io::Result<Vec<_>>>()?;
        let doc = JsonOut {
            metadata: self.metadata.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
            columns: &self.columns,
            rows,
        };
        serde_json::to_writer_pretty(&mut w, &doc).map_err(io::Error::other)?;
        writeln!(w)?;
        w.flush()
    }

    pub fn write_to(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let mut buffer = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buffer),
            Format::Json => self.write_json(&mut buffer),
        }
        .expect("writing to memory");
        match out {
            Some(path) => fs::write(path, buffer).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            }),
            None => io::stdout().write_all(&buffer).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
        }
    }

    /// Parses either format; JSON is recognised by a leading `{`.
    pub fn parse(text: &str) -> Result<Table, String> {
        if text.trim_start().starts_with('{') {
            let doc: JsonIn = serde_json::from_str(text).map_err(|e| e.to_string())?;
            return Ok(Table {
                metadata: doc.metadata.into_iter().collect(),
                columns: doc.columns,
                rows: doc
                    .rows
                    .into_iter()
                    .map(|row| row.into_iter().map(|c| c.get().to_string()).collect())
                    .collect(),
            });
        }
        let mut table = Table::default();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        for line in lines.by_ref() {
            match line.strip_prefix('#') {
                Some(meta) => {
                    let (k, v) = meta.split_once(':').ok_or_else(|| format!("bad metadata line `{line}`"))?;
                    table.metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                None => {
                    table.columns = line.split(',').map(|c| c.trim().to_string()).collect();
                    break;
                }
            }
        }
        if table.columns.is_empty() {
            return Err("missing column header".into());
        }
        for line in lines {
            let row: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
            if row.len() != table.columns.len() {
                return Err(format!("row `{line}` has {} fields, expected {}", row.len(), table.columns.len()));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}
