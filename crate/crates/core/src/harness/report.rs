//! Report serialization: summary CSV, full JSON traces, scaling-curve
//! CSV, and an aligned text table for terminals.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::runner::{RunReport, ScalingPoint};

#[derive(Serialize)]
struct SummaryRow {
    strategy: String,
    n: usize,
    seed: u64,
    accuracy: f64,
    mean_tokens_thousands: f64,
    mean_latency_s: f64,
    wall_time_s: f64,
}

fn summary_row(report: &RunReport) -> SummaryRow {
    SummaryRow {
        strategy: report.config.strategy.to_string(),
        n: report.config.n,
        seed: report.seed,
        accuracy: report.accuracy,
        mean_tokens_thousands: report.mean_tokens_thousands,
        mean_latency_s: report.mean_latency_s,
        wall_time_s: report.wall_time_s,
    }
}

/// Write one summary row per report. Column order is stable:
/// `strategy,n,seed,accuracy,mean_tokens_thousands,mean_latency_s,wall_time_s`.
pub fn emit_csv(reports: &[RunReport], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Report("no reports to write".into()));
    }
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    for report in reports {
        writer
            .serialize(summary_row(report))
            .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Write full reports, including per-problem traces, as pretty JSON.
pub fn emit_json(reports: &[RunReport], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Report("no reports to write".into()));
    }
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, reports)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Read back reports written by [`emit_json`].
pub fn load_json(path: &Path) -> Result<Vec<RunReport>> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

/// Write one `strategy,budget,accuracy,mean_latency_s` row per scaling
/// point.
pub fn emit_scaling_csv(points: &[ScalingPoint], path: &Path) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Report("no scaling points to write".into()));
    }
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    for point in points {
        #[derive(Serialize)]
        struct Row {
            strategy: String,
            budget: usize,
            accuracy: f64,
            mean_latency_s: f64,
        }
        writer
            .serialize(Row {
                strategy: point.strategy.to_string(),
                budget: point.budget,
                accuracy: point.accuracy,
                mean_latency_s: point.mean_latency_s,
            })
            .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Render reports as an aligned text table for stdout.
pub fn render_table(reports: &[RunReport]) -> String {
    let mut rows = vec![[
        "strategy".to_string(),
        "n".to_string(),
        "seed".to_string(),
        "accuracy".to_string(),
        "mean_ktok".to_string(),
        "mean_latency_s".to_string(),
        "wall_time_s".to_string(),
    ]];
    for report in reports {
        let row = summary_row(report);
        rows.push([
            row.strategy,
            row.n.to_string(),
            row.seed.to_string(),
            format!("{:.4}", row.accuracy),
            format!("{:.3}", row.mean_tokens_thousands),
            format!("{:.3}", row.mean_latency_s),
            format!("{:.3}", row.wall_time_s),
        ]);
    }
    let mut widths = [0usize; 7];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
