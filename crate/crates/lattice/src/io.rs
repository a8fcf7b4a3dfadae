//! CSV exchange format: header `t,value`, one row per grid point.

use std::fmt::Write as _;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::path::{LatticePath, PathError, PathKind, Time};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing or malformed header, expected `t,value`")]
    Header,
    #[error("line {line}: {msg}")]
    Row { line: usize, msg: String },
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Fixed notation with 12 significant digits.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let prec = (11 - mag).max(0) as usize;
    let s = format!("{x:.prec$}");
    if s.contains('.') {
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".to_string()
        } else {
            s.to_string()
        }
    } else {
        s
    }
}

pub fn write_csv(p: &LatticePath) -> String {
    let mut out = String::from("t,value\n");
    for k in 0..=p.steps() {
        let _ = writeln!(out, "{},{}", format_value(p.time_f64(k)), format_value(p.value(k)));
    }
    out
}

/// Parse a CSV written on the grid `dt` and check the lattice invariants.
/// The kind is `Reflected` when every value is nonnegative.
pub fn read_csv(text: &str, dt: Time) -> Result<LatticePath, CsvError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == "t,value" => {}
        _ => return Err(CsvError::Header),
    }
    let dtf = dt.to_f64().unwrap_or(f64::NAN);
    let dx = dtf.sqrt();
    let mut coords = Vec::new();
    for (i, line) in lines {
        let row = |msg: String| CsvError::Row { line: i + 1, msg };
        let (t, v) = line.split_once(',').ok_or_else(|| row("expected two fields".into()))?;
        let t: f64 = t.trim().parse().map_err(|_| row(format!("bad time {t:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| row(format!("bad value {v:?}")))?;
        let k = coords.len() as f64;
        if (t - k * dtf).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(row(format!("time {t} is not grid point {k} * dt")));
        }
        let c = (v / dx).round();
        if (v - c * dx).abs() > 1e-9 * (1.0 + v.abs()) {
            return Err(row(format!("value {v} is not a multiple of dx")));
        }
        coords.push(c as i64);
    }
    let kind = if coords.iter().all(|&c| c >= 0) { PathKind::Reflected } else { PathKind::Signed };
    Ok(LatticePath::new(dt, kind, coords)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_value(-2.5), "-2.5");
        assert_eq!(format_value(1234.56789012345), "1234.56789012");
    }

    #[test]
    fn round_trip() {
        let dt = Time::new(1, 1024);
        let p = crate::path::sample_srw(300, dt, 9);
        let q = read_csv(&write_csv(&p), dt).unwrap();
        assert_eq!(p.coords(), q.coords());
    }

    #[test]
    fn rejects_off_lattice_values() {
        let text = "t,value\n0,0\n1,0.5\n";
        assert!(matches!(read_csv(text, Time::from_integer(1)), Err(CsvError::Row { .. })));
        assert!(matches!(read_csv("x,y\n0,0\n", Time::from_integer(1)), Err(CsvError::Header)));
        let jump = "t,value\n0,0\n1,2\n";
        assert!(matches!(read_csv(jump, Time::from_integer(1)), Err(CsvError::Path(_))));
    }
}
