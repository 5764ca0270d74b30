//! CSV and JSON writers shared by the library and the command-line tool.
//!
//! Floats are written with 17 significant digits so that values round-trip.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::density_evolution::DeTrace;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `iter,failure_fraction,x_min,x_max,x_mean`, one row per iteration.
pub fn write_de_summary_csv(trace: &DeTrace, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "iter,failure_fraction,x_min,x_max,x_mean")?;
    for s in &trace.summaries {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.iter,
            fmt_f64(s.failure_fraction),
            fmt_f64(s.x_min),
            fmt_f64(s.x_max),
            fmt_f64(s.x_mean)
        )?;
    }
    Ok(())
}

/// `iter,position,x,z` for every recorded state.
pub fn write_de_states_csv(trace: &DeTrace, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "iter,position,x,z")?;
    for r in &trace.records {
        for (i, (x, z)) in r.x.iter().zip(&r.z).enumerate() {
            writeln!(w, "{},{},{},{}", r.iter, i, fmt_f64(*x), fmt_f64(*z))?;
        }
    }
    Ok(())
}

/// `index,<header>` for a single vector.
pub fn write_vector_csv(header: &str, values: &[f64], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "index,{header}")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_f64(*v))?;
    }
    Ok(())
}

pub fn write_json(value: &impl Serialize, path: &Path) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{averaging_matrix, make_staircase};
    use crate::density_evolution::{de_iterate, ErasureProfile};

    #[test]
    fn round_trip_precision() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, std::f64::consts::PI, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn trace_csvs() {
        let b = averaging_matrix(&make_staircase(3).unwrap()).to_sparse();
        let trace = de_iterate(&b, &ErasureProfile::regular(2).unwrap(), 2.0, 4).unwrap();
        let mut buf = Vec::new();
        write_de_summary_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("iter,failure_fraction,x_min,x_max,x_mean\n1,"));

        let mut buf = Vec::new();
        write_de_states_csv(&trace, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 4 * 3);
    }
}
