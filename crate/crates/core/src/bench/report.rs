use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{Method, ReportFormat, Task};
use super::run::AccuracyReport;

pub const CSV_HEADER: &str = "method,task,accuracy,seed,wall_ms";

/// Flat `(method, task)` cell used by the table emitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub task: Task,
    pub accuracy: f64,
    pub seed: Option<u64>,
    pub wall_ms: Option<u64>,
    /// Number quoted from the literature rather than measured here.
    #[serde(default)]
    pub paper_reported: bool,
}

pub fn table_rows(report: &AccuracyReport) -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = report
        .results()
        .iter()
        .map(|r| TableRow {
            method: r.method.label().to_string(),
            task: r.task,
            accuracy: r.accuracy,
            seed: Some(r.seed),
            wall_ms: report.wall_ms(r.task, r.method),
            paper_reported: false,
        })
        .collect();
    sort_rows(&mut rows);
    rows
}

fn method_rank(name: &str) -> (usize, String) {
    let rank = name.parse::<Method>().map_or(Method::ALL.len(), |m| m as usize);
    (rank, name.to_string())
}

fn sort_rows(rows: &mut [TableRow]) {
    rows.sort_by(|a, b| {
        (a.paper_reported, method_rank(&a.method), a.task).cmp(&(b.paper_reported, method_rank(&b.method), b.task))
    });
}

pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let method = if r.paper_reported {
            format!("{} (paper-reported)", r.method)
        } else {
            r.method.clone()
        };
        let opt = |v: Option<u64>| v.map_or(String::new(), |x| x.to_string());
        let _ = writeln!(
            out,
            "{method},{},{:.6},{},{}",
            r.task.label(),
            r.accuracy,
            opt(r.seed),
            opt(r.wall_ms)
        );
    }
    out
}

/// Methods as rows, tasks as columns in table order.
pub fn render_markdown(rows: &[TableRow]) -> String {
    let mut tasks: Vec<Task> = rows.iter().map(|r| r.task).collect();
    tasks.sort();
    tasks.dedup();
    let mut order: Vec<(bool, String)> = Vec::new();
    let mut cells: BTreeMap<(bool, String, Task), f64> = BTreeMap::new();
    for r in rows {
        let key = (r.paper_reported, r.method.clone());
        if !order.contains(&key) {
            order.push(key);
        }
        cells.insert((r.paper_reported, r.method.clone(), r.task), r.accuracy);
    }
    order.sort_by_key(|a| (a.0, method_rank(&a.1)));

    let mut out = String::from("| Method |");
    for t in &tasks {
        let _ = write!(out, " {} |", t.label());
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(tasks.len()));
    out.push('\n');
    for (quoted, method) in &order {
        let name = if *quoted {
            format!("{method} (paper-reported)")
        } else {
            method.clone()
        };
        let _ = write!(out, "| {name} |");
        for &t in &tasks {
            match cells.get(&(*quoted, method.clone(), t)) {
                Some(a) => {
                    let _ = write!(out, " {:.2}% |", 100.0 * a);
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write `report.{csv,json,md}` into `dir`, creating it if needed.
pub fn emit_report(report: &AccuracyReport, formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = table_rows(report);
    let mut written = Vec::new();
    for f in formats {
        let (name, text) = match f {
            ReportFormat::Csv => ("report.csv", render_csv(&rows)),
            ReportFormat::Json => ("report.json", serde_json::to_string_pretty(report)? + "\n"),
            ReportFormat::Md => ("report.md", render_markdown(&rows)),
        };
        let path = dir.join(name);
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// Rows from every `*.json` report in `dir`.
pub fn collect_rows(dir: &Path) -> Result<Vec<TableRow>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let report: AccuracyReport = serde_json::from_str(&text).map_err(|e| Error::format(&p, e.to_string()))?;
        rows.extend(table_rows(&report));
    }
    if rows.is_empty() {
        return Err(Error::format(dir, "no report.json files found"));
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Literature numbers from a `method,task,accuracy` CSV, accuracy as a
/// fraction or a percentage.
pub fn read_reference(path: &Path) -> Result<Vec<TableRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("method")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |m: String| Error::format(path, format!("line {}: {m}", i + 1));
        if fields.len() < 3 {
            return Err(bad("expected method,task,accuracy".into()));
        }
        let task: Task = fields[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let raw = fields[2].trim_end_matches('%');
        let mut accuracy: f64 = raw.parse().map_err(|_| bad(format!("bad accuracy '{}'", fields[2])))?;
        if fields[2].ends_with('%') || accuracy > 1.0 {
            accuracy /= 100.0;
        }
        rows.push(TableRow {
            method: fields[0].to_string(),
            task,
            accuracy,
            seed: None,
            wall_ms: None,
            paper_reported: true,
        });
    }
    Ok(rows)
}

pub fn render(rows: &[TableRow], format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Csv => render_csv(rows),
        ReportFormat::Md => render_markdown(rows),
        ReportFormat::Json => serde_json::to_string_pretty(rows)? + "\n",
    })
}
