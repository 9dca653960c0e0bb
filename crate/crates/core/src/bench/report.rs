use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::csv_error;
use crate::error::{Error, Result};
use crate::fidelity::names;

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub metric: String,
    pub image_id: u64,
    pub score: f64,
    pub degenerate_flag: u8,
}

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub params_digest: String,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_rows(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
}

// Full-scale reference figures, shown only as a direction to
// compare against: (metric, [(mean, std); 2]).
const REFERENCE: [(&str, [(f64, f64); 2]); 4] = [
    (
        names::FAITHFULNESS_CORRELATION,
        [(0.7866, 0.2963), (0.2979, 0.3401)],
    ),
    (
        names::FAITHFULNESS_ESTIMATE,
        [(0.7751, 0.2888), (0.4871, 0.3532)],
    ),
    (names::INFIDELITY, [(5.9897, 23.6442), (8.63e7, 1.1e10)]),
    (
        names::REGION_PERTURBATION,
        [(0.2192, 0.1812), (0.2334, 0.1627)],
    ),
];

struct Column {
    label: String,
    rows: Vec<SummaryRow>,
    degenerate: Option<Vec<(String, usize)>>,
}

impl Column {
    fn row(&self, metric: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    fn degenerate(&self, metric: &str) -> Option<usize> {
        let counts = self.degenerate.as_ref()?;
        Some(
            counts
                .iter()
                .find(|(m, _)| m == metric)
                .map_or(0, |(_, c)| *c),
        )
    }
}

/// Builds a metric-by-experiment table from `summary.csv` files.
///
/// Degenerate counts are read from a `results.csv` next to each summary when
/// one exists. `labels` defaults to the parent directory names.
pub fn cmd_report(summaries: &[&Path], labels: &[String], format: ReportFormat) -> Result<String> {
    if summaries.is_empty() {
        return Err(Error::validation("no summary files given"));
    }
    if !labels.is_empty() && labels.len() != summaries.len() {
        return Err(Error::validation(format!(
            "{} labels for {} summary files",
            labels.len(),
            summaries.len()
        )));
    }
    let mut columns = Vec::new();
    for (i, path) in summaries.iter().enumerate() {
        let rows = read_summary(path)?;
        let results = path.with_file_name(super::RESULTS_FILE);
        let degenerate = if results.exists() {
            let mut counts: Vec<(String, usize)> = Vec::new();
            for r in read_results(&results)? {
                match counts.iter_mut().find(|(m, _)| *m == r.metric) {
                    Some((_, c)) => *c += usize::from(r.degenerate_flag != 0),
                    None => counts.push((r.metric, usize::from(r.degenerate_flag != 0))),
                }
            }
            Some(counts)
        } else {
            None
        };
        let label = labels.get(i).cloned().unwrap_or_else(|| {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let dir = match dir {
                Some(d) if d.file_name().is_some_and(|n| n == "eval") => d.parent(),
                other => other,
            };
            dir.and_then(|p| p.file_name()).map_or_else(
                || format!("run{}", i + 1),
                |n| n.to_string_lossy().into_owned(),
            )
        });
        columns.push(Column {
            label,
            rows,
            degenerate,
        });
    }

    let mut metrics: Vec<String> = names::ALL.iter().map(|m| m.to_string()).collect();
    for c in &columns {
        for r in &c.rows {
            if !metrics.contains(&r.metric) {
                metrics.push(r.metric.clone());
            }
        }
    }

    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str("metric,experiment,mean,std,min,max,n,degenerate\n");
            for m in &metrics {
                for c in &columns {
                    if let Some(r) = c.row(m) {
                        let d = c.degenerate(m).map_or(String::new(), |d| d.to_string());
                        writeln!(
                            out,
                            "{m},{},{},{},{},{},{},{d}",
                            c.label, r.mean, r.std, r.min, r.max, r.n
                        )
                        .expect("string write");
                    }
                }
            }
        }
        ReportFormat::Text => {
            let cells: Vec<Vec<String>> = metrics
                .iter()
                .map(|m| {
                    columns
                        .iter()
                        .map(|c| match c.row(m) {
                            Some(r) => {
                                let mut s = format!(
                                    "{} ± {} [{}, {}]",
                                    fmt_num(r.mean),
                                    fmt_num(r.std),
                                    fmt_num(r.min),
                                    fmt_num(r.max)
                                );
                                if let Some(d) = c.degenerate(m).filter(|d| *d > 0) {
                                    write!(s, " ({d} degenerate)").expect("string write");
                                }
                                s
                            }
                            None => "-".into(),
                        })
                        .collect()
                })
                .collect();
            let mwidth = metrics.iter().map(|m| m.len()).max().unwrap_or(6).max(6);
            let widths: Vec<usize> = columns
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    cells
                        .iter()
                        .map(|row| row[j].chars().count())
                        .chain([c.label.chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let mut header = format!("{:mwidth$}", "metric");
            for (c, w) in columns.iter().zip(&widths) {
                write!(header, "  {:w$}", c.label).expect("string write");
            }
            out.push_str(header.trim_end());
            out.push('\n');
            for (m, row) in metrics.iter().zip(&cells) {
                let mut line = format!("{m:mwidth$}");
                for (cell, w) in row.iter().zip(&widths) {
                    write!(line, "  {cell:w$}").expect("string write");
                }
                out.push_str(line.trim_end());
                out.push('\n');
            }
            let n: Vec<String> = columns
                .iter()
                .map(|c| format!("{}={}", c.label, c.rows.first().map_or(0, |r| r.n)))
                .collect();
            writeln!(out, "\nimages: {}", n.join(", ")).expect("string write");
            out.push_str(
                "\nfull-scale reference (128x128, 2000 validation images; direction only):\n",
            );
            for (m, [e1, e2]) in REFERENCE {
                writeln!(
                    out,
                    "  {m:mwidth$}  uniform {} ± {}  textured {} ± {}",
                    fmt_num(e1.0),
                    fmt_num(e1.1),
                    fmt_num(e2.0),
                    fmt_num(e2.1)
                )
                .expect("string write");
            }
        }
    }
    Ok(out)
}

fn fmt_num(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}
