//! Linear programs `max c^T x` subject to `A x = b`, `x >= 0`.

use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::matrix::DenseMatrix;

use super::{content_lines, parse_err, parse_numbers};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub a: DenseMatrix<Rational>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

impl LinearProgram {
    /// Checks shapes and that `A` has full row rank.
    pub fn new(a: DenseMatrix<Rational>, b: Vec<Rational>, c: Vec<Rational>) -> Result<Self> {
        let (d, n) = a.dims();
        if d == 0 || d > n {
            return Err(Error::InvalidInput(format!("constraint matrix is {d}x{n}; need 0 < d <= n")));
        }
        if b.len() != d || c.len() != n {
            return Err(Error::InvalidInput(format!(
                "b has {} entries and c has {}; expected {d} and {n}",
                b.len(),
                c.len()
            )));
        }
        if a.rank() != d {
            return Err(Error::InvalidInput("constraint matrix is not of full row rank".into()));
        }
        Ok(LinearProgram { a, b, c })
    }

    /// Parses `d n`, then `d` rows of `A`, then `b`, then `c`.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = content_lines(text).collect();
        let (ln, head) = *lines.first().ok_or_else(|| parse_err(1, "missing `d n` line"))?;
        let dims: Vec<usize> = head
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, "expected `d n`")))
            .collect::<Result<_>>()?;
        let [d, n] = dims[..] else {
            return Err(parse_err(ln, "expected `d n`"));
        };
        if d == 0 {
            return Err(parse_err(ln, "need at least one constraint"));
        }
        if lines.len() != d + 3 {
            return Err(parse_err(
                lines.last().map_or(1, |l| l.0),
                &format!("expected {} lines after `d n`, found {}", d + 2, lines.len() - 1),
            ));
        }
        let mut rows = Vec::new();
        for &(ln, line) in &lines[1..=d] {
            let row = parse_numbers::<Rational>(line, ln)?;
            if row.len() != n {
                return Err(parse_err(ln, &format!("expected {n} entries in row of A")));
            }
            rows.push(row);
        }
        let (bl, bt) = lines[d + 1];
        let b = parse_numbers::<Rational>(bt, bl)?;
        if b.len() != d {
            return Err(parse_err(bl, &format!("expected {d} entries in b")));
        }
        let (cl, ct) = lines[d + 2];
        let c = parse_numbers::<Rational>(ct, cl)?;
        if c.len() != n {
            return Err(parse_err(cl, &format!("expected {n} entries in c")));
        }
        Self::new(DenseMatrix::from_rows(rows)?, b, c)
    }

    pub fn constraints(&self) -> usize {
        self.a.rows()
    }

    pub fn variables(&self) -> usize {
        self.a.cols()
    }

    pub fn objective(&self, x: &[Rational]) -> Rational {
        self.c
            .iter()
            .zip(x)
            .fold(Rational::zero(), |acc, (c, x)| acc + c.clone() * x.clone())
    }

    /// `A x = b` and `x >= 0`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.variables()
            && x.iter().all(|v| *v >= Rational::zero())
            && self.a.mul_vec(x).map(|ax| ax == self.b).unwrap_or(false)
    }
}
