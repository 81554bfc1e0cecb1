//! Report files: CSV in milliseconds, JSON in seconds.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::config::OutputFormat;
use crate::error::BenchError;
use crate::stats::TimingReport;

pub const CSV_HEADER: [&str; 9] = [
    "label",
    "iqm",
    "mean",
    "std",
    "min",
    "median",
    "moet",
    "first_call",
    "n",
];

fn ms(seconds: f64) -> String {
    format!("{:.6}", seconds * 1e3)
}

pub fn write_report(
    reports: &[TimingReport],
    path: &Path,
    format: OutputFormat,
) -> Result<(), BenchError> {
    match format {
        OutputFormat::Csv => write_csv(reports, path),
        OutputFormat::Json => write_json(reports, path),
    }
}

fn write_csv(reports: &[TimingReport], path: &Path) -> Result<(), BenchError> {
    let encode = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => BenchError::io(path, source),
        other => BenchError::Encode {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    };
    let mut writer = csv::Writer::from_path(path).map_err(encode)?;
    writer.write_record(CSV_HEADER).map_err(encode)?;
    for r in reports {
        writer
            .write_record([
                r.label.clone(),
                ms(r.iqm),
                ms(r.mean),
                ms(r.std),
                ms(r.min),
                ms(r.median),
                ms(r.moet),
                ms(r.first_call),
                r.n.to_string(),
            ])
            .map_err(encode)?;
    }
    writer.flush().map_err(|e| BenchError::io(path, e))
}

fn write_json(reports: &[TimingReport], path: &Path) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), reports).map_err(|e| BenchError::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_json_report(path: &Path) -> Result<Vec<TimingReport>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Human-readable table in milliseconds for terminal output.
pub fn format_table(reports: &[TimingReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.label.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!(
        "{:<width$} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>6}\n",
        "label", "iqm ms", "mean ms", "std ms", "min ms", "median ms", "moet ms", "first ms", "n"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<width$} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>6}\n",
            r.label,
            ms(r.iqm),
            ms(r.mean),
            ms(r.std),
            ms(r.min),
            ms(r.median),
            ms(r.moet),
            ms(r.first_call),
            r.n
        ));
    }
    out
}
