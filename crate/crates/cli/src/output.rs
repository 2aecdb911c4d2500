//! Report rendering and file output.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Failure;

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Arguments after the program name, `--out` excluded.
    pub command: Vec<String>,
    pub seed: u64,
    pub budget: Value,
    pub tool_version: String,
    pub wall_time_secs: f64,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Fixed-point with six decimals; `inf`/`nan` spelled out.
pub fn fixed6(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.6}");
        if s == "-0.000000" {
            "0.000000".into()
        } else {
            s
        }
    } else {
        format!("{v}")
    }
}

/// Renders a JSON document as indented `key: value` lines.
pub fn render_text(v: &Value) -> String {
    fn walk(v: &Value, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    match x {
                        Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                            out.push_str(&format!("{pad}{k}:\n"));
                            walk(x, indent + 1, out);
                        }
                        _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(x))),
                    }
                }
            }
            Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    if is_flat(x) {
                        out.push_str(&format!("{pad}- {}\n", scalar(x)));
                    } else {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        walk(x, indent + 1, out);
                    }
                }
            }
            other => out.push_str(&format!("{pad}{}\n", scalar(other))),
        }
    }
    fn is_flat(v: &Value) -> bool {
        match v {
            Value::Array(items) => items.iter().all(|x| !x.is_object() && !x.is_array()),
            Value::Object(_) => false,
            _ => true,
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    walk(v, 0, &mut out);
    out
}

/// A table to be written as CSV.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String, Failure> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        w.write_record(&self.header).map_err(Failure::io)?;
        for r in &self.rows {
            w.write_record(r).map_err(Failure::io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))
    }
}

/// Output bundle of one command.
pub struct Output {
    pub report: Value,
    pub tables: Vec<Table>,
}

impl Output {
    /// Writes `report.json`, `report.txt` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<String>, Failure> {
        fs::create_dir_all(dir).map_err(Failure::io)?;
        let mut names = Vec::new();
        let mut put = |name: String, body: String| -> Result<(), Failure> {
            fs::write(dir.join(&name), body).map_err(Failure::io)?;
            names.push(name);
            Ok(())
        };
        put("report.json".into(), serde_json::to_string_pretty(&self.report).map_err(Failure::io)? + "\n")?;
        put("report.txt".into(), render_text(&self.report))?;
        for t in &self.tables {
            put(format!("{}.csv", t.name), t.to_csv()?)?;
        }
        Ok(names)
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf, Failure> {
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(manifest).map_err(Failure::io)? + "\n").map_err(Failure::io)?;
    Ok(path)
}
