//! CSV ingestion and export, and log-return preprocessing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metric::DataMatrix;

/// Parses a comma-separated numeric table, rows are time points.
pub fn parse_csv(text: &str, has_header: bool) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let first_line = if has_header { 2 } else { 1 };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(first_line + i, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Data(format!(
                "line {line}: expected {w} columns, found {}",
                rec.len()
            )));
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::Data(format!(
                            "line {line}, column {}: \"{cell}\" is not a finite number",
                            j + 1
                        ))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    DataMatrix::from_rows(&rows)
}

/// Reads a data file; see [`parse_csv`].
pub fn ingest_csv(path: &Path, has_header: bool) -> Result<DataMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// `log(X[t+1, i] / X[t, i])`, an `(n-1) x p` matrix.
pub fn log_returns(prices: &DataMatrix) -> Result<DataMatrix> {
    let (n, p) = (prices.n(), prices.p());
    if n < 2 {
        return Err(Error::TooSmall {
            what: "log returns",
            min: 2,
            got: n,
        });
    }
    if let Some(k) = prices.values().iter().position(|&v| v <= 0.0) {
        return Err(Error::Data(format!(
            "price at row {}, column {} is not positive",
            k / p + 1,
            k % p + 1
        )));
    }
    let mut out = Vec::with_capacity((n - 1) * p);
    for t in 0..n - 1 {
        let (now, next) = (prices.row(t), prices.row(t + 1));
        out.extend(now.iter().zip(next).map(|(a, b)| (b / a).ln()));
    }
    DataMatrix::new(n - 1, p, out)
}

/// Writes values with shortest round-trip formatting, so re-reading the
/// file reproduces every value exactly.
pub fn write_csv<W: Write>(mut w: W, data: &DataMatrix, header: bool) -> std::io::Result<()> {
    if header {
        let names: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
        writeln!(w, "{}", names.join(","))?;
    }
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_csv_file(path: &Path, data: &DataMatrix, header: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(&mut w, data, header)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
