//! CSV tables and JSON sidecars.
//!
//! Numbers are written with 10 significant digits. Every CSV ends with a
//! `#` comment line holding the seed and the exact configuration, and every
//! CSV has a JSON sidecar with the same information.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RawConfig, RunConfig};
use crate::error::Result;
use crate::simulator::{DemoRow, OptimizerRecord, SimulationRecord, SweepAxis};

pub const SIGNIFICANT_DIGITS: usize = 10;

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits: fixed notation for
/// moderate magnitudes, scientific otherwise, trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_else(|| "NaN".into())
}

pub const SIMULATION_COLUMNS: [&str; 5] = ["scheme", "mean_link_throughput", "pf_utility", "ci_halfwidth", "replications"];

/// Comment line embedding the seed and configuration.
pub fn provenance_line(config: &RunConfig) -> Result<String> {
    Ok(format!(
        "# seed={} config={}",
        config.seed,
        serde_json::to_string(&config.emit())?
    ))
}

fn finish(mut writer: csv::Writer<Vec<u8>>, trailer: &str) -> Result<String> {
    writer.flush()?;
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    let mut text = String::from_utf8(bytes).expect("csv output is utf-8");
    text.push_str(trailer);
    text.push('\n');
    Ok(text)
}

/// One row per grid point and scheme, in grid order then scheme order. A
/// failed grid point yields rows of `NaN` with zero replications.
pub fn simulation_csv(axis: SweepAxis, records: &[SimulationRecord], schemes: &[String], trailer: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![axis.as_str()];
    header.extend(SIMULATION_COLUMNS);
    w.write_record(&header)?;
    for rec in records {
        let value = format_number(rec.value);
        match &rec.outcome {
            Ok(reports) => {
                for r in reports {
                    w.write_record([
                        value.as_str(),
                        &r.scheme,
                        &format_number(r.mean_link_throughput),
                        &format_number(r.pf_utility),
                        &format_number(r.mean_ci_halfwidth),
                        &r.replications.to_string(),
                    ])?;
                }
            }
            Err(_) => {
                for s in schemes {
                    w.write_record([value.as_str(), s, "NaN", "NaN", "NaN", "0"])?;
                }
            }
        }
    }
    finish(w, trailer)
}

/// Solver and closed-form columns; the interference axis adds an `op`
/// column.
pub fn optimizer_csv(axis: SweepAxis, records: &[OptimizerRecord], trailer: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let with_op = axis == SweepAxis::Interference;
    let mut header = vec![axis.as_str()];
    if with_op {
        header.push("op");
    }
    header.extend(["p_solver_eq5", "p_solver_eq6", "p_solver_arccot", "p_closed_form", "abs_err"]);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![format_number(r.value)];
        if with_op {
            row.push(opt(r.op));
        }
        row.extend([
            opt(r.p_solver_eq5),
            opt(r.p_solver_eq6),
            opt(r.p_solver_arccot),
            opt(r.p_closed_form),
            opt(r.abs_err),
        ]);
        w.write_record(&row)?;
    }
    finish(w, trailer)
}

pub fn demo_csv(rows: &[DemoRow], trailer: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "mode",
        "sir_rx1",
        "sir_rx2",
        "sir_sum",
        "sir_per_tx_rx1",
        "sir_per_tx_rx2",
        "resource_tx1",
        "resource_tx2",
        "resource_sum",
    ])?;
    for r in rows {
        w.write_record([
            r.mode.as_str().to_string(),
            format_number(r.sir[0]),
            format_number(r.sir[1]),
            format_number(r.sir_sum()),
            format_number(r.sir_per_transmission[0]),
            format_number(r.sir_per_transmission[1]),
            format_number(r.resource[0]),
            format_number(r.resource[1]),
            format_number(r.resource_sum()),
        ])?;
    }
    finish(w, trailer)
}

/// Reproducibility record written next to every CSV.
#[derive(Debug, Serialize)]
pub struct Sidecar<'a, T: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub config: RawConfig,
    pub errors: Vec<String>,
    pub results: T,
}

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`, creating `dir`.
pub fn write_outputs<T: Serialize>(dir: &Path, name: &str, csv: &str, sidecar: &Sidecar<'_, T>) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{name}.csv"));
    let json_path = dir.join(format!("{name}.json"));
    fs::write(&csv_path, csv)?;
    fs::write(&json_path, serde_json::to_string_pretty(sidecar)? + "\n")?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
        assert_eq!(format_number(std::f64::consts::PI), "3.141592654");
        assert_eq!(format_number(-1234.5678901234), "-1234.56789");
        assert_eq!(format_number(1e-11), "1e-11");
        assert_eq!(format_number(1.23456789012345e-7), "1.23456789e-7");
        assert_eq!(format_number(0.000123456789012), "0.000123456789");
        assert_eq!(format_number(0.00012345678951), "0.0001234567895");
        assert_eq!(format_number(9.9999999999e9), "1e10");
        assert_eq!(format_number(123456789.04), "123456789");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn optimizer_header_is_fixed() {
        let text = optimizer_csv(SweepAxis::Theta, &[], "# t").unwrap();
        assert_eq!(text, "theta,p_solver_eq5,p_solver_eq6,p_solver_arccot,p_closed_form,abs_err\n# t\n");
    }
}
