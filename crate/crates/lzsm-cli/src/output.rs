//! CSV emission. Layout: `#`-prefixed metadata (version, config echo,
//! failure notes), one header line, then data rows with 13 significant
//! digits and LF endings. Identical configs reproduce the physics columns
//! byte for byte; only `wall_time_s` varies between runs.

use crate::config::SweepConfig;
use crate::sweep::SweepRow;
use lzsm::TrajectoryRecord;
use std::io::{self, Write};

pub const SWEEP_HEADER: &str = "axis,P1,P2,P3,trace_error,min_eig,wall_time_s";

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.12e}")
    }
}

fn metadata(out: &mut impl Write, kind: &str, cfg: &SweepConfig) -> io::Result<()> {
    writeln!(out, "# lzsm {} {kind}", env!("CARGO_PKG_VERSION"))?;
    let echo = serde_json::to_string(cfg).expect("config serializes");
    writeln!(out, "# config = {echo}")?;
    Ok(())
}

pub fn emit_sweep_csv(
    cfg: &SweepConfig,
    rows: &[SweepRow],
    out: &mut impl Write,
) -> io::Result<()> {
    assert!(!rows.is_empty(), "emit_sweep_csv requires at least one row");
    metadata(out, "sweep", cfg)?;
    for row in rows {
        if let Some(message) = &row.error {
            writeln!(out, "# failed[axis={}]: {message}", fmt(row.value))?;
        }
        if row.flagged() {
            writeln!(
                out,
                "# flagged[axis={}]: population outside [0, 1]",
                fmt(row.value)
            )?;
        }
    }
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(row.value),
            fmt(row.p1),
            fmt(row.p2),
            fmt(row.p3),
            fmt(row.trace_error),
            fmt(row.min_eig),
            fmt(row.wall_time_s),
        )?;
    }
    Ok(())
}

pub const TRAJECTORY_HEADER: &str =
    "t,P1,P2,P3,re_rho12,im_rho12,re_rho13,im_rho13,re_rho23,im_rho23";

pub fn emit_trajectory_csv(
    cfg: &SweepConfig,
    record: &TrajectoryRecord,
    out: &mut impl Write,
) -> io::Result<()> {
    metadata(out, "trajectory", cfg)?;
    writeln!(
        out,
        "# trace_error = {} herm_error = {} min_eig = {}",
        fmt(record.trace_error),
        fmt(record.herm_error),
        fmt(record.min_eig)
    )?;
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for ((t, p), c) in record
        .times
        .iter()
        .zip(record.populations.iter())
        .zip(record.coherences.iter())
    {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt(*t),
            fmt(p[0]),
            fmt(p[1]),
            fmt(p[2]),
            fmt(c[0].re),
            fmt(c[0].im),
            fmt(c[1].re),
            fmt(c[1].im),
            fmt(c[2].re),
            fmt(c[2].im),
        )?;
    }
    Ok(())
}

/// Strips the `wall_time_s` column and every comment line; what remains is
/// the deterministic part of a sweep CSV.
pub fn deterministic_section(csv: &str) -> String {
    csv.lines()
        .filter(|line| !line.starts_with('#'))
        .map(|line| {
            let mut cols: Vec<&str> = line.split(',').collect();
            if cols.len() == 7 {
                cols.pop();
            }
            cols.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
