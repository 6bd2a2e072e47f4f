//! Report assembly: the classification table as CSV and a JSON mirror.
//!
//! Both files are written only after every row has been computed, so a
//! failing configuration never leaves a partial report behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// The CSV schema. Dimension columns not computed in a run are left
/// empty, never dropped.
pub const CSV_HEADER: &str = "top_n,feature,param,vocab_size,err_full,err_2,err_3,err_4,err_5,adj_err_full,adj_err_2,adj_err_3,adj_err_4,adj_err_5";

/// The reduced dimensions the report schema can carry.
pub const REPORT_DIMS: [usize; 4] = [2, 3, 4, 5];

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub top_n: usize,
    pub feature: String,
    pub param: Option<usize>,
    pub vocab_size: usize,
    pub err_full: usize,
    /// Per-dimension error counts for the dimensions actually run.
    pub errs: BTreeMap<usize, usize>,
    pub adj_err_full: usize,
    pub adj_errs: BTreeMap<usize, usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<String>,
}

fn cell(map: &BTreeMap<usize, usize>, dim: usize) -> String {
    map.get(&dim).map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        let param = row.param.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}",
            row.top_n, row.feature, param, row.vocab_size, row.err_full
        ));
        for dim in REPORT_DIMS {
            out.push(',');
            out.push_str(&cell(&row.errs, dim));
        }
        out.push_str(&format!(",{}", row.adj_err_full));
        for dim in REPORT_DIMS {
            out.push(',');
            out.push_str(&cell(&row.adj_errs, dim));
        }
        out.push('\n');
    }
    out
}

/// Write `<prefix>.csv` and `<prefix>.json`; returns the two paths.
pub fn write(report: &Report, prefix: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let csv_path = std::path::PathBuf::from(format!("{}.csv", prefix.display()));
    let json_path = std::path::PathBuf::from(format!("{}.json", prefix.display()));
    fs::write(&csv_path, to_csv(report))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    let json = serde_json::to_string_pretty(report).context("serializing report")?;
    fs::write(&json_path, json + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    Ok((csv_path, json_path))
}
