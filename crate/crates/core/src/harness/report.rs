//! CSV and JSON report files.
//!
//! Surface CSVs have the header `grid_value,obj_original,obj_nsp_best,obj_nsp_worst`,
//! LF line endings and numbers printed with 12 significant digits. The grid
//! column is in degrees, seconds or Hz for the angle, delay and Doppler
//! files respectively; grid points no trial could evaluate print as `nan`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::{RunReport, RunSummary, SurfaceTable, TrialRecord};
use crate::error::{Error, Result};
use crate::estimator::Axis;
use crate::waveform::WaveformMatrix;

pub const SURFACE_HEADER: &str = "grid_value,obj_original,obj_nsp_best,obj_nsp_worst";

const SIGNIFICANT_DIGITS: usize = 12;

/// Format like C's `%.12g`: fixed notation for decimal exponents in
/// `[-4, 12)`, scientific otherwise, trailing zeros removed.
pub fn format_significant(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn axis_file_stem(axis: Axis) -> &'static str {
    match axis {
        Axis::Angle => "angle",
        Axis::Delay => "delay",
        Axis::Doppler => "doppler",
    }
}

/// Render one surface table as CSV text.
pub fn surface_csv(grid: &[f64], columns: [&[f64]; 3]) -> String {
    let mut out = String::with_capacity(grid.len() * 64);
    out.push_str(SURFACE_HEADER);
    out.push('\n');
    for (i, g) in grid.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_significant(*g),
            format_significant(columns[0][i]),
            format_significant(columns[1][i]),
            format_significant(columns[2][i])
        );
    }
    out
}

fn table_csv(t: &SurfaceTable) -> String {
    surface_csv(&t.grid, [&t.columns[0], &t.columns[1], &t.columns[2]])
}

/// Waveform as CSV: one row per sample, real and imaginary part per element.
pub fn waveform_csv(x: &WaveformMatrix) -> String {
    let mut out = String::from("sample");
    for k in 0..x.num_tx() {
        let _ = write!(out, ",re_{k},im_{k}");
    }
    out.push('\n');
    for (n, col) in x.samples().column_iter().enumerate() {
        out.push_str(&n.to_string());
        for z in col.iter() {
            let _ = write!(out, ",{},{}", format_significant(z.re), format_significant(z.im));
        }
        out.push('\n');
    }
    out
}

fn write_file(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Write every report file into `dir` (created if missing) and return the
/// paths written.
pub fn emit_reports(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for table in &report.surfaces {
        let name = format!("surfaces_{}.csv", axis_file_stem(table.axis));
        write_file(dir.join(name), &table_csv(table), &mut written)?;
    }
    write_file(dir.join("trials.json"), &to_json(&report.trials), &mut written)?;
    write_file(dir.join("summary.json"), &to_json(&report.summary), &mut written)?;

    if let Some(x) = &report.waveform {
        write_file(dir.join("waveform.csv"), &waveform_csv(x), &mut written)?;
    }
    if !report.per_trial_surfaces.is_empty() {
        let sub = dir.join("trial_surfaces");
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        for ts in &report.per_trial_surfaces {
            for (a, table) in report.surfaces.iter().enumerate() {
                let cols = [&ts.values[0][a][..], &ts.values[1][a][..], &ts.values[2][a][..]];
                let name = format!("trial_{:04}_{}.csv", ts.trial, axis_file_stem(table.axis));
                write_file(sub.join(name), &surface_csv(&table.grid, cols), &mut written)?;
            }
        }
    }
    Ok(written)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_summary(path: &Path) -> Result<RunSummary> {
    read_json(path)
}

pub fn load_trials(path: &Path) -> Result<Vec<TrialRecord>> {
    read_json(path)
}
