//! CSV output: header row, values as decimal scientific with 12 significant
//! digits, comma separators, LF line endings. Byte-identical for identical
//! inputs.

use std::io::Write;
use std::path::Path;
use thinfilm_core::diagnostics::eoc::EocTable;
use thinfilm_core::diagnostics::ScalarSeries;

pub fn format_value(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn write_series(series: &ScalarSeries, ridge: bool, path: &Path) -> std::io::Result<()> {
    let mut out = Vec::new();
    if ridge {
        out.extend_from_slice(b"step,t,energy,volume,min_h,max_h,contact_length,ridge_width\n");
    } else {
        out.extend_from_slice(b"step,t,energy,volume,min_h,max_h,contact_length\n");
    }
    for row in &series.rows {
        let mut line = format!(
            "{},{},{},{},{},{},{}",
            row.step,
            format_value(row.t),
            format_value(row.energy),
            format_value(row.volume),
            format_value(row.min_h),
            format_value(row.max_h),
            format_value(row.contact_length),
        );
        if ridge {
            line.push(',');
            line.push_str(&format_value(row.ridge_width.unwrap_or(f64::NAN)));
        }
        line.push('\n');
        out.extend_from_slice(line.as_bytes());
    }
    write_atomic(path, &out)
}

pub fn write_eoc_table(table: &EocTable, path: &Path) -> std::io::Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(b"label,resolution,error,eoc,valid\n");
    for row in &table.rows {
        let eoc = row.eoc.map(format_value).unwrap_or_default();
        let line = format!(
            "{},{},{},{},{}\n",
            row.label,
            format_value(row.resolution),
            format_value(row.error),
            eoc,
            row.valid
        );
        out.extend_from_slice(line.as_bytes());
    }
    write_atomic(path, &out)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    f.write_all(bytes)?;
    Ok(())
}

/// Parse a series CSV back (for round-trip checks and external reuse).
pub fn read_series(path: &Path) -> std::io::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        rows.push(
            line.split(',')
                .map(|v| v.parse::<f64>().unwrap_or(f64::NAN))
                .collect(),
        );
    }
    Ok((header, rows))
}
