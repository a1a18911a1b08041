//! Plain-text matrix format.
//!
//! ```text
//! # optional comment lines
//! 2 3
//! 1.0 2.0 3.0
//! 4.0 5.0 6.0
//! ```
//!
//! The header holds `rows cols`; each following line holds one row of
//! space-separated reals, written with enough digits to round-trip exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(m: &Matrix, mut w: W) -> Result<()> {
    w.write_all(format_matrix(m).as_bytes())?;
    Ok(())
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            // Debug formatting is the shortest string that parses back to the same f64.
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<Matrix> {
    let mut header: Option<(usize, usize)> = None;
    let mut data = Vec::new();
    let mut rows_seen = 0;
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if header.is_none() && (trimmed.is_empty() || trimmed.starts_with('#')) {
            continue;
        }
        let Some((rows, cols)) = header else {
            header = Some(parse_header(trimmed, lineno)?);
            continue;
        };
        if trimmed.is_empty() {
            continue;
        }
        if rows_seen == rows {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("more than {rows} data rows"),
            });
        }
        let before = data.len();
        for tok in trimmed.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid number {tok:?}"),
            })?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {cols} values, found {}", data.len() - before),
            });
        }
        rows_seen += 1;
    }
    let (rows, cols) = header.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing `rows cols` header".into(),
    })?;
    if rows_seen != rows {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {rows} data rows, found {rows_seen}"),
        });
    }
    Matrix::new(rows, cols, data)
}

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let bad = || Error::Parse {
        line: lineno,
        msg: format!("expected `rows cols` header, found {line:?}"),
    };
    let mut it = line.split_whitespace();
    let rows = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
    let cols = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
    if it.next().is_some() {
        return Err(bad());
    }
    Ok((rows, cols))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let f = std::fs::File::open(path)?;
    read_matrix(std::io::BufReader::new(f))
}

pub fn save_matrix(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}
