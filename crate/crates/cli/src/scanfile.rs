//! Comma-separated region scans and their gnuplot companion.

use delta_stab::analysis::RegionScan;
use delta_stab::oracle::OracleVerdict;
use std::io::{self, Write};

/// Fixed-point decimal with `digits` significant digits.
pub fn decimal(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return "nan".into();
    }
    if v == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let exponent = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).clamp(0, 40) as usize;
    format!("{v:.decimals$}")
}

pub fn header(scan: &RegionScan) -> String {
    let mut cols = vec!["alpha".to_string(), "beta".into(), "rho_max".into(), "oracle_verdict".into()];
    cols.extend(scan.methods.iter().map(|m| m.to_string()));
    cols.join(",")
}

pub fn write_scan(scan: &RegionScan, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{}", header(scan))?;
    for cell in &scan.cells {
        write!(w, "{},{},{},{}", cell.alpha, cell.beta, decimal(cell.rho_max, 12), cell.oracle.label())?;
        for v in &cell.verdicts {
            write!(w, ",{}", v.label())?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One `alpha beta` block per region, separated by two blank lines so that
/// `index i` selects a block.
pub fn write_gnuplot(scan: &RegionScan, w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "# index 0: oracle stable; index i: certified by method i")?;
    writeln!(w, "# oracle")?;
    for cell in scan.cells.iter().filter(|c| c.oracle == OracleVerdict::Stable) {
        writeln!(w, "{} {}", cell.alpha, cell.beta)?;
    }
    for (i, m) in scan.methods.iter().enumerate() {
        write!(w, "\n\n# {m}\n")?;
        for cell in scan.cells.iter().filter(|c| c.verdicts[i].is_certified()) {
            writeln!(w, "{} {}", cell.alpha, cell.beta)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub alpha: f64,
    pub beta: f64,
    pub rho_max: f64,
    pub oracle: String,
    pub verdicts: Vec<String>,
}

/// Reads back a scan file; returns the method columns and the rows.
pub fn read_scan(text: &str) -> Result<(Vec<String>, Vec<ScanRow>), String> {
    let mut lines = text.lines();
    let head: Vec<&str> = lines.next().ok_or("empty scan file")?.split(',').collect();
    if head.len() < 4 || head[..4] != ["alpha", "beta", "rho_max", "oracle_verdict"] {
        return Err(format!("unexpected header {head:?}"));
    }
    let methods: Vec<String> = head[4..].iter().map(|s| s.to_string()).collect();
    let num = |s: &str, line: usize| s.parse::<f64>().map_err(|e| format!("line {line}: {s:?}: {e}"));
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != head.len() {
            return Err(format!("line {}: {} fields, expected {}", i + 2, f.len(), head.len()));
        }
        rows.push(ScanRow {
            alpha: num(f[0], i + 2)?,
            beta: num(f[1], i + 2)?,
            rho_max: num(f[2], i + 2)?,
            oracle: f[3].to_string(),
            verdicts: f[4..].iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok((methods, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_keep_twelve_digits() {
        assert_eq!(decimal(0.7, 12), "0.700000000000");
        assert_eq!(decimal(1.234, 12), "1.23400000000");
        assert_eq!(decimal(0.00123, 12), "0.00123000000000");
        assert_eq!(decimal(0.0, 12), "0.00000000000");
        assert_eq!(decimal(12.5, 12), "12.5000000000");
        assert_eq!(decimal(f64::NAN, 12), "nan");
    }

    #[test]
    fn decimal_parses_back_closely() {
        for v in [0.123456789012345, 0.99999999999, 1.000000000001, 3.14159265358979] {
            let back: f64 = decimal(v, 12).parse().unwrap();
            assert!((back - v).abs() <= 1e-11 * v.abs(), "{v}");
        }
    }

    #[test]
    fn malformed_scans_are_rejected() {
        assert!(read_scan("").is_err());
        assert!(read_scan("a,b\n").is_err());
        assert!(read_scan("alpha,beta,rho_max,oracle_verdict,thm4k2\n0,0,0.5,stable\n").is_err());
        let (m, rows) = read_scan("alpha,beta,rho_max,oracle_verdict\n0,0.5,0.5,stable\n").unwrap();
        assert!(m.is_empty());
        assert_eq!(rows[0].beta, 0.5);
    }
}
