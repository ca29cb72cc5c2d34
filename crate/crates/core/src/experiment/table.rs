use std::path::Path;
use std::str::FromStr;

use super::ResultRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            _ => Err(Error::InvalidSpec(format!("unknown table format {s:?}"))),
        }
    }
}

/// `x` rounded to four significant digits, without exponent.
pub fn significant(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.000".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude >= 3 {
        let unit = 10f64.powi(magnitude - 3);
        format!("{:.0}", (x / unit).round() * unit)
    } else {
        let decimals = (3 - magnitude) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding can carry into a new digit (9.9996 → 10.000).
        let carried: f64 = s.parse().unwrap_or(x);
        if carried.abs().log10().floor() as i32 > magnitude && decimals > 0 {
            format!("{x:.prec$}", prec = decimals - 1)
        } else {
            s
        }
    }
}

fn header(with_times: bool) -> Vec<&'static str> {
    let mut h = vec!["mode", "omega", "nc", "kappa", "it"];
    if with_times {
        h.extend(["analysis", "factorization", "iterations", "total"]);
    }
    h
}

fn cells(row: &ResultRow, with_times: bool) -> Vec<String> {
    let mut c = vec![
        row.label(),
        row.indicator.map(significant).unwrap_or_default(),
        row.nc.to_string(),
        significant(row.condition),
        row.iterations.to_string(),
    ];
    if with_times {
        let t = &row.times;
        c.extend([t.analysis, t.factorization, t.iterations, t.total].map(|s| format!("{s:.3}")));
    }
    c
}

/// Renders the result table. Columns: mode (or τ), ω̃, Nc, κ, iterations,
/// then the phase times in seconds when requested.
pub fn emit_table(rows: &[ResultRow], format: TableFormat, with_times: bool) -> Result<String> {
    let head = header(with_times);
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&head)?;
            for r in rows {
                w.write_record(cells(r, with_times))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        TableFormat::Markdown => {
            let line = |c: &[String]| format!("| {} |\n", c.join(" | "));
            let head: Vec<String> = head.iter().map(|s| s.to_string()).collect();
            let mut out = line(&head);
            out.push_str(&line(&vec!["---".to_string(); head.len()]));
            for r in rows {
                out.push_str(&line(&cells(r, with_times)));
            }
            Ok(out)
        }
    }
}

pub fn write_table(path: &Path, rows: &[ResultRow], format: TableFormat, with_times: bool) -> Result<()> {
    std::fs::write(path, emit_table(rows, format, with_times)?)?;
    Ok(())
}

/// Reads a table in either format back into a header and string cells.
/// Markdown tables are converted to CSV and read by the CSV parser.
pub fn parse_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let csv_text = if text.trim_start().starts_with('|') {
        let mut w = csv::Writer::from_writer(Vec::new());
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let inner = line.trim_start_matches('|').trim_end_matches('|');
            let fields: Vec<&str> = inner.split('|').map(str::trim).collect();
            if fields.iter().all(|f| !f.is_empty() && f.chars().all(|c| c == '-' || c == ':')) {
                continue;
            }
            w.write_record(&fields)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8")
    } else {
        text.to_string()
    };
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_significant_digits() {
        assert_eq!(significant(28.3), "28.30");
        assert_eq!(significant(1.0), "1.000");
        assert_eq!(significant(19.8243), "19.82");
        assert_eq!(significant(0.012345), "0.01235");
        assert_eq!(significant(123456.0), "123500");
        assert_eq!(significant(9.99996), "10.00");
        assert_eq!(significant(f64::INFINITY), "inf");
    }
}
