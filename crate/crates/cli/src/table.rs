//! Result tables and their text form.
//!
//! Output is a `#` comment block, one header row and one row per point.
//! Numbers use Rust's shortest round-trip scientific notation, so parsing
//! the text gives back the exact same `f64` values. Empty cells mark
//! values that do not exist at that point, such as rates at an infeasible
//! operating point.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    fn sep(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// Comment lines without the leading `# `.
    pub meta: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn emit(&self, format: Format) -> String {
        let sep = format.sep();
        let mut out = String::new();
        for line in &self.meta {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                let _ = writeln!(out, "# {line}");
            }
        }
        out.push_str(&self.columns.join(&sep.to_string()));
        out.push('\n');
        for row in &self.rows {
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(sep);
                }
                if let Some(x) = cell {
                    let _ = write!(out, "{x:e}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, format: Format) -> Result<Self, CliError> {
        let sep = format.sep();
        let mut meta = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => {
                    let body = &l[1..];
                    meta.push(body.strip_prefix(' ').unwrap_or(body).to_string());
                }
                Some(l) => break l,
                None => return Err(CliError::Parse("table has no header row".into())),
            }
        };
        let columns: Vec<String> = header.split(sep).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = line
                .split(sep)
                .map(|c| {
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|e| CliError::Parse(format!("row {}: '{c}': {e}", n + 1)))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != columns.len() {
                return Err(CliError::Parse(format!(
                    "row {} has {} cells, header has {}",
                    n + 1,
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { meta, columns, rows })
    }
}
