//! CSV and JSON output of a benchmark report.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::bench::{BenchmarkReport, RunRow};

/// Fixed CSV header, one column per `RunRow` field.
pub const CSV_HEADER: [&str; 14] = [
    "instance",
    "setting",
    "status",
    "objective",
    "time_s",
    "nodes",
    "confs_glb",
    "confs_loc",
    "proofs_rejected",
    "lift_root",
    "lift_half",
    "lift_partial",
    "lift_none",
    "lp_iterations",
];

/// Published JSON schema of [`BenchmarkReport`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn write_csv<W: Write>(rows: &[RunRow], out: W) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush().map_err(|source| ReportError::Io { path: "<csv>".into(), source })?;
    Ok(())
}

pub fn csv_string(rows: &[RunRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn to_json(report: &BenchmarkReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    std::fs::write(path, text).map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

/// Human-readable summary in the shape of a results table.
pub fn render_table(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    for bracket in &report.brackets {
        let _ = writeln!(out, "{} ({} instances)", bracket.label, bracket.instances.len());
        let _ = writeln!(
            out,
            "  {:<12} {:>6} {:>9} {:>7} {:>9} {:>7} {:>9} {:>9} {:>8}  lift root/half/partial/none",
            "setting", "solved", "time", "time_Q", "nodes", "nodes_Q", "confs_glb", "confs_loc", "rejected"
        );
        for s in &bracket.summaries {
            let _ = writeln!(
                out,
                "  {:<12} {:>6} {:>9.3} {:>7.3} {:>9.1} {:>7.3} {:>9} {:>9} {:>8}  {}/{}/{}/{}",
                s.setting,
                s.solved,
                s.time_sgm,
                s.time_q,
                s.nodes_sgm,
                s.nodes_q,
                s.confs_glb,
                s.confs_loc,
                s.proofs_rejected,
                s.lift_root,
                s.lift_half,
                s.lift_partial,
                s.lift_none
            );
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {}: {}", w.instance, w.message);
    }
    out
}
