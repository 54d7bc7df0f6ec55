//! Output files: `#` comment header with the resolved experiment, then CSV
//! or a JSON array of row objects.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentSpec, Format};
use crate::{CliError, Result, VERSION};

/// Column-oriented numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Shortest round-trip decimal; `inf`/`-inf`/`nan` spelled out.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    spec: &'a ExperimentSpec,
}

pub fn header_lines(spec: &ExperimentSpec, notes: &[String]) -> String {
    let header = Header {
        tool: "thinsim",
        version: VERSION,
        spec,
    };
    let mut out = format!("# thinsim {VERSION} {}\n", spec.command.name());
    out.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(&header).expect("spec serializes")
    ));
    for n in notes {
        out.push_str(&format!("# {n}\n"));
    }
    out
}

pub fn render(spec: &ExperimentSpec, table: &Table, notes: &[String]) -> Result<Vec<u8>> {
    let mut buf = header_lines(spec, notes).into_bytes();
    match spec.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| CliError::Io {
                path: "<buffer>".into(),
                source: e.into(),
            };
            w.write_record(&table.columns).map_err(io)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|v| format_number(*v)))
                    .map_err(io)?;
            }
            w.flush().map_err(|e| CliError::Io {
                path: "<buffer>".into(),
                source: e,
            })?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                .rows
                .iter()
                .map(|row| {
                    table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| {
                            let value = serde_json::Number::from_f64(*v)
                                .map(serde_json::Value::Number)
                                .unwrap_or_else(|| serde_json::Value::String(format_number(*v)));
                            (c.to_string(), value)
                        })
                        .collect()
                })
                .collect();
            serde_json::to_writer_pretty(&mut buf, &rows).expect("rows serialize");
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
