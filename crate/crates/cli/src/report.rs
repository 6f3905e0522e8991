//! CSV and JSON report writers.

use crate::CliError;
use sdc_core::analysis::{running_slopes, ConvergenceRecord};
use std::io::Write;
use std::path::Path;

pub const SWEEP_HEADER: [&str; 6] = ["n", "b_n", "error", "bound", "ratio", "slope_running"];

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[ConvergenceRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for (row, slope) in rows.iter().zip(running_slopes(rows)) {
        w.write_record([
            row.n.to_string(),
            fmt17(row.b_n),
            fmt17(row.error),
            fmt17(row.bound),
            fmt17(row.ratio),
            fmt17(slope),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("summary serialises")
}
