//! CSV and JSON emission.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::harness::config::OutputFormat;
use crate::harness::experiment::{ExperimentReport, InstanceRow};
use crate::memetic::TraceRow;

fn to_io(e: impl std::error::Error + Send + Sync + 'static) -> io::Error {
    io::Error::other(e)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    for r in rows {
        w.serialize(r).map_err(to_io)?;
    }
    w.flush()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(to_io)?;
    fs::write(path, text + "\n")
}

/// Writes `rows` as `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
pub fn write_rows<T: Serialize>(dir: &Path, stem: &str, rows: &[T], format: OutputFormat) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = match format {
        OutputFormat::Csv => dir.join(format!("{stem}.csv")),
        OutputFormat::Json => dir.join(format!("{stem}.json")),
    };
    match format {
        OutputFormat::Csv => write_csv(&path, rows)?,
        OutputFormat::Json => write_json(&path, rows)?,
    }
    Ok(path)
}

/// Summary rows, per-run rows, and (for JSON) the whole report.
pub fn write_report(dir: &Path, report: &ExperimentReport, format: OutputFormat) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            Ok(vec![write_rows(dir, "summary", &report.rows, format)?, write_rows(dir, "runs", &report.runs, format)?])
        }
        OutputFormat::Json => {
            let path = dir.join("report.json");
            write_json(&path, report)?;
            Ok(vec![path])
        }
    }
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> io::Result<()> {
    write_csv(path, trace)
}

/// Plain-text table with `Ave(Std)`, `Best`, `Time` and, when available,
/// the degradation rate.
pub fn format_summary(rows: &[InstanceRow], ave_pdr: Option<f64>) -> String {
    let mut out = format!("{:<24} {:>20} {:>12} {:>10} {:>8}\n", "instance", "Ave(Std)", "Best", "Time(s)", "PDR%");
    for r in rows {
        if let Some(e) = &r.error {
            out.push_str(&format!("{:<24} error: {e}\n", r.instance));
            continue;
        }
        let pdr = r.pdr.map_or_else(|| "-".to_string(), |p| format!("{p:.2}"));
        out.push_str(&format!(
            "{:<24} {:>20} {:>12.2} {:>10.2} {:>8}\n",
            r.instance,
            format!("{:.2}({:.2})", r.ave, r.std),
            r.best,
            r.time_s,
            pdr
        ));
    }
    if let Some(p) = ave_pdr {
        out.push_str(&format!("Ave.PDR {p:.2}%\n"));
    }
    out
}
