//! Online linear systems.
//!
//! Rows of `A` and entries of `b` arrive one at a time. After row `s` the
//! solver returns `A[..s, ..s]^-1 b[..s]` by maintaining
//!
//! ```text
//! inv(D*B*D + (I - D)) * D * d
//! ```
//!
//! where `D` is the diagonal selector of the first `s` indices, `B` holds
//! the rows received so far and `d` the received prefix of `b`. Push `s`
//! touches only entry `(s, s)` of `D`, row `s` of `B` and entry `s` of `d`.

use crate::dyninv::{Orientation, ResetPolicy, SmwInverse};
use crate::dynformula::{DynamicFormula, UpdateEvent};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::formula::{Assignment, Formula};
use crate::matrix::DenseMatrix;

pub struct OnlineLinearSystem<F: Field> {
    n: usize,
    s: usize,
    df: DynamicFormula<F, SmwInverse<F>>,
    d_sel: usize,
    b_rows: usize,
    d_vec: usize,
    last_events: Vec<UpdateEvent<F>>,
}

pub fn formula_text(n: usize) -> String {
    format!("input D:{n}x{n}; input B:{n}x{n}; input d:{n}x1; out inv(D*B*D + (id({n}) - D))*D*d")
}

impl<F: Field> OnlineLinearSystem<F> {
    pub fn new(n: usize, policy: ResetPolicy) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("system size must be positive".into()));
        }
        let f = Formula::parse(&formula_text(n))?;
        let a = Assignment::zeros(&f);
        // pushes change rows of N, so factor the delta by rows
        let df = DynamicFormula::open_with_backend(&f, &a, policy, |m| {
            SmwInverse::with_orientation(m, Orientation::Rows)
        })?;
        Ok(OnlineLinearSystem {
            n,
            s: 0,
            d_sel: df.input_index("D").expect("D"),
            b_rows: df.input_index("B").expect("B"),
            d_vec: df.input_index("d").expect("d"),
            df,
            last_events: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rows received so far.
    pub fn step(&self) -> usize {
        self.s
    }

    pub fn dynamic(&self) -> &DynamicFormula<F, SmwInverse<F>> {
        &self.df
    }

    /// The events issued by the last successful push.
    pub fn last_events(&self) -> &[UpdateEvent<F>] {
        &self.last_events
    }

    /// Receives row `s` of `A` and `b_s`, returns the solution of the
    /// leading `s x s` system. Fails with `SingularPrefix(s)` (1-based) if
    /// that system is singular; the state is then unchanged.
    pub fn push(&mut self, row: Vec<F>, b: F) -> Result<Vec<F>> {
        if self.s >= self.n {
            return Err(Error::InvalidInput(format!("all {} rows already received", self.n)));
        }
        if row.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "row has {} entries, expected {}",
                row.len(),
                self.n
            )));
        }
        let s = self.s;
        let events = vec![
            UpdateEvent::entry(self.d_sel, s, s, F::one()),
            UpdateEvent::row(self.b_rows, s, row),
            UpdateEvent::entry(self.d_vec, s, 0, b),
        ];
        match self.df.apply(&events) {
            Ok(()) => {}
            Err(Error::Singular) => return Err(Error::SingularPrefix(s + 1)),
            Err(e) => return Err(e),
        }
        self.s += 1;
        self.last_events = events;
        let mut x = self.df.get_column(0);
        x.truncate(self.s);
        Ok(x)
    }
}

/// One stream row `(a, b)`.
pub type StreamRow<F> = (Vec<F>, F);

/// Parses `n` followed by `n` lines `a_1 ... a_n | b`.
pub fn parse_stream<F: Field>(text: &str) -> Result<(usize, Vec<StreamRow<F>>)> {
    let mut lines = super::content_lines(text);
    let (ln, first) = lines
        .next()
        .ok_or_else(|| super::parse_err(1, "missing system size"))?;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| super::parse_err(ln, "expected system size"))?;
    let mut rows = Vec::new();
    for (ln, line) in lines {
        let (lhs, rhs) = line
            .split_once('|')
            .ok_or_else(|| super::parse_err(ln, "expected `|` before b"))?;
        let row = super::parse_numbers::<F>(lhs, ln)?;
        if row.len() != n {
            return Err(super::parse_err(ln, &format!("expected {n} coefficients, found {}", row.len())));
        }
        let b = super::parse_numbers::<F>(rhs, ln)?;
        if b.len() != 1 {
            return Err(super::parse_err(ln, "expected one right-hand side value"));
        }
        rows.push((row, b.into_iter().next().expect("one value")));
    }
    if rows.len() > n {
        return Err(super::parse_err(0, &format!("more than {n} rows")));
    }
    Ok((n, rows))
}

/// Direct solve of the leading `s x s` system, for comparison.
pub fn prefix_solve<F: Field>(a: &DenseMatrix<F>, b: &[F], s: usize) -> Result<Vec<F>> {
    let idx: Vec<usize> = (0..s).collect();
    a.select(&idx, &idx).solve(&b[..s])
}
