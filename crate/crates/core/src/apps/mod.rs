//! Application drivers built on [`DynamicFormula`](crate::DynamicFormula).

pub mod ipm;
pub mod lp;
pub mod online_ls;
pub mod qr;
pub mod simplex;

use crate::error::{Error, Result};
use crate::field::{parse_scalar, Field};
use crate::matrix::DenseMatrix;

/// Non-empty lines with `#` comments removed, numbered from 1.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub(crate) fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        column: 1,
        message: message.to_string(),
    }
}

pub(crate) fn parse_numbers<F: Field>(line: &str, ln: usize) -> Result<Vec<F>> {
    line.split_whitespace()
        .map(|t| parse_scalar(t).ok_or_else(|| parse_err(ln, &format!("bad number `{t}`"))))
        .collect()
}

/// Reads a matrix written as whitespace-separated rows, one per line.
pub fn parse_matrix<F: Field>(text: &str) -> Result<DenseMatrix<F>> {
    let mut rows = Vec::new();
    for (ln, line) in content_lines(text) {
        let row = parse_numbers::<F>(line, ln)?;
        if let Some(first) = rows.first() {
            let first: &Vec<F> = first;
            if first.len() != row.len() {
                return Err(parse_err(ln, "rows have different lengths"));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "empty matrix"));
    }
    DenseMatrix::from_rows(rows)
}
