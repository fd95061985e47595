//! Tables and their CSV / JSON renderings.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::{Format, Resolved};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Num(v) if v.is_finite() => format!("{:.16e}", v + 0.0),
            Cell::Num(v) => format!("{v}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Summary lines such as `max_abs_deviation`, also echoed on stdout.
    pub notes: Vec<(String, f64)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().copied().map(Cell::Num).collect());
    }
}

pub fn render(table: &Table, resolved: &Resolved) -> Result<String, CliError> {
    let config = serde_json::to_value(resolved.to_run_config()).map_err(|e| CliError::Runtime(e.to_string()))?;
    match resolved.format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# centralspin {}", env!("CARGO_PKG_VERSION"));
            let _ = writeln!(out, "# config: {config}");
            for (name, v) in &table.notes {
                let _ = writeln!(out, "# {name} = {v:.16e}");
            }
            let _ = writeln!(out, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
            Ok(out)
        }
        Format::Json => {
            let rows: Vec<Value> =
                table.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
            let notes: serde_json::Map<String, Value> =
                table.notes.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            let doc = json!({
                "generator": format!("centralspin {}", env!("CARGO_PKG_VERSION")),
                "config": config,
                "notes": notes,
                "columns": table.columns,
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
