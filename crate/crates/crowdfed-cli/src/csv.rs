//! Canonical CSV emission.
//!
//! Header: `scheme,seed,episode,reward,energy,latency,data,d_1,…,d_N`.
//! Floats are printed in fixed decimal with 6 significant digits, rows
//! sorted by (scheme, seed, episode), so re-emitting the same table yields a
//! byte-identical file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::experiment::MetricRow;
use crate::HarnessError;

/// Fixed-decimal representation with 6 significant digits.
pub fn format_sig(value: f64) -> String {
    if value == 0.0 {
        return "0.00000".to_string();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 17) as usize;
    format!("{value:.decimals$}")
}

fn write_rows<W: Write>(out: &mut W, rows: &[MetricRow]) -> std::io::Result<()> {
    let num_devices = rows.first().map_or(0, |r| r.data_units.len());
    write!(out, "scheme,seed,episode,reward,energy,latency,data")?;
    for n in 1..=num_devices {
        write!(out, ",d_{n}")?;
    }
    writeln!(out)?;
    for r in rows {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            r.scheme,
            r.seed,
            r.episode,
            format_sig(r.reward),
            format_sig(r.energy),
            format_sig(r.latency),
            format_sig(r.data),
        )?;
        for d in &r.data_units {
            write!(out, ",{}", format_sig(*d))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes rows (already sorted by the harness) to `path`.
pub fn emit_csv(rows: &[MetricRow], path: &Path) -> Result<(), HarnessError> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| (a.scheme, a.seed, a.episode).cmp(&(b.scheme, b.seed, b.episode)));
    let mut out = BufWriter::new(File::create(path)?);
    write_rows(&mut out, &sorted)?;
    out.flush()?;
    Ok(())
}

/// In-memory rendering, used by tests to check byte identity.
pub fn render_csv(rows: &[MetricRow]) -> String {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| (a.scheme, a.seed, a.episode).cmp(&(b.scheme, b.seed, b.episode)));
    let mut buf = Vec::new();
    write_rows(&mut buf, &sorted).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Exports (state index, action index, value) triples, e.g. a value
/// function with its policy, or a Q-table restricted to feasible pairs.
pub fn emit_value_csv(
    entries: &[(usize, usize, f64)],
    path: &Path,
) -> Result<(), HarnessError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "state,action,value")?;
    for &(state, action, value) in entries {
        writeln!(out, "{state},{action},{}", format_sig(value))?;
    }
    out.flush()?;
    Ok(())
}
