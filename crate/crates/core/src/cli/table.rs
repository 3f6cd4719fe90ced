//! CSV tables: one header row with units, `#` comment lines, numbers in
//! shortest round-trip form.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ExpTerm, ExponentialSeries};

pub const SERIES_HEADER: [&str; 4] = ["Re p [alpha]", "Im p [alpha]", "Re Omega [1/time]", "Im Omega [1/time]"];

/// Formats a number so that parsing it back gives the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn io_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::invalid(field, e.to_string())
}

/// Writes `# comment` lines, a header and the rows.
pub fn write_table(
    out: &mut dyn Write,
    field: &str,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}").map_err(|e| io_err(field, e))?;
    }
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(header).map_err(|e| io_err(field, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(field, e))?;
    }
    w.flush().map_err(|e| io_err(field, e))?;
    Ok(())
}

/// Rows of a numeric table; blank cells are `None`. A first row that does not
/// parse as numbers is taken as the header.
pub fn read_rows(text: &str, field: &str) -> Result<Vec<Vec<Option<f64>>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(field, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<Option<f64>>, _> = rec
            .iter()
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some)
                }
            })
            .collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 && rows.is_empty() => continue,
            Err(e) => return Err(Error::invalid(field, format!("row {}: {e}", i + 1))),
        }
    }
    Ok(rows)
}

pub fn read_file(path: &Path, field: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(field, format!("{}: {e}", path.display())))
}

fn required(row: &[Option<f64>], col: usize, field: &str, line: usize) -> Result<f64> {
    row.get(col)
        .copied()
        .flatten()
        .ok_or_else(|| Error::invalid(field, format!("row {line}: missing column {}", col + 1)))
}

/// Two- or three-column table `(x, re, [im])`.
pub fn read_complex_columns(text: &str, field: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let rows = read_rows(text, field)?;
    if rows.is_empty() {
        return Err(Error::invalid(field, "no data rows"));
    }
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() > 3 {
            return Err(Error::invalid(field, format!("row {}: expected 2 or 3 columns", i + 1)));
        }
        x.push(required(r, 0, field, i + 1)?);
        let re = required(r, 1, field, i + 1)?;
        let im = r.get(2).copied().flatten().unwrap_or(0.0);
        y.push(Complex64::new(re, im));
    }
    Ok((x, y))
}

pub fn read_series(text: &str, field: &str) -> Result<ExponentialSeries> {
    let rows = read_rows(text, field)?;
    let mut terms = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() != 4 {
            return Err(Error::invalid(field, format!("row {}: expected 4 columns", i + 1)));
        }
        let v: Vec<f64> = (0..4).map(|c| required(r, c, field, i + 1)).collect::<Result<_>>()?;
        terms.push(ExpTerm::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])));
    }
    Ok(ExponentialSeries::new(terms))
}

pub fn series_rows(series: &ExponentialSeries) -> Vec<Vec<String>> {
    series
        .terms()
        .iter()
        .map(|t| vec![num(t.p.re), num(t.p.im), num(t.omega.re), num(t.omega.im)])
        .collect()
}
