//! Target functions, error metric, study configuration and the convergence
//! driver.

mod config;
mod study;
mod targets;

pub use config::{EvalSource, NodeSource, StudyConfig, StudyMode};
pub use study::{
    build_eval_set, build_node_sets, run_convergence, write_study_csv, ConvergenceRow, NodeSet, CSV_SCHEMA_VERSION,
};
pub use targets::{registry, registry_lookup, TargetFunction};

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// `‖s − f‖₂ / ‖f‖₂`.
pub fn rel_l2_error(s_vals: &[f64], f_vals: &[f64]) -> Result<f64> {
    if s_vals.len() != f_vals.len() {
        return Err(Error::Shape { expected: f_vals.len(), got: s_vals.len() });
    }
    let den = f_vals.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(den > 0.0) {
        return Err(Error::Metric("reference values have zero norm".into()));
    }
    let num = s_vals.iter().zip(f_vals).map(|(s, f)| (s - f) * (s - f)).sum::<f64>().sqrt();
    Ok(num / den)
}

/// One value per line with 17 significant digits.
pub fn write_values(mut out: impl Write, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

/// Reads one value per line; blank lines and `#` comments are skipped.
pub fn read_values(input: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|_| Error::Parse(format!("line {}: invalid value `{t}`", i + 1)))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_cases() {
        let f = [3.0, -4.0, 1.0];
        assert_eq!(rel_l2_error(&f, &f).unwrap(), 0.0);
        let twice: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        assert!((rel_l2_error(&twice, &f).unwrap() - 1.0).abs() < 1e-15);
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut bumped = f;
        bumped[0] += norm;
        assert!((rel_l2_error(&bumped, &f).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(rel_l2_error(&[1.0], &[0.0]), Err(Error::Metric(_))));
        assert!(rel_l2_error(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn values_round_trip() {
        let v = [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23];
        let mut buf = Vec::new();
        write_values(&mut buf, &v).unwrap();
        assert_eq!(read_values(buf.as_slice()).unwrap(), v);
        assert!(read_values("1.0\nabc\n".as_bytes()).is_err());
    }
}
