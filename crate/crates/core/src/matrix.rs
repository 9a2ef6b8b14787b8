//! Dense matrices over a [`Field`] and the sparse deltas applied to them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::ops;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> DenseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Ok(DenseMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| F::from_i64(v)).collect())
                .collect(),
        )
        .expect("rectangular literal")
    }

    pub fn column_vector(values: Vec<F>) -> Self {
        DenseMatrix {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &DenseMatrix<F>) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(row + i, col + j)] = block[(i, j)].clone();
            }
        }
    }

    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(row + i, col + j)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(F::is_zero)
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> DenseMatrix<G> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "+", |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "-", |a, b| a.clone() - b.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    fn zip_with(&self, other: &Self, op: &str, f: impl Fn(&F, &F) -> F) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::dim(op, self.dims(), other.dims()));
        }
        ops::count_adds(self.data.len() as u64);
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Classical triple-loop product; performs exactly `r * k * c` scalar
    /// multiplications.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dim("*", self.dims(), other.dims()));
        }
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                let mut acc = F::zero();
                for t in 0..k {
                    acc.add_mul(&self[(i, t)], &other[(t, j)]);
                }
                out[(i, j)] = acc;
            }
        }
        ops::count_muls((n * k * m) as u64);
        ops::count_adds((n * k * m) as u64);
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>> {
        if self.cols != v.len() {
            return Err(Error::dim("*", self.dims(), (v.len(), 1)));
        }
        ops::count_muls((self.rows * self.cols) as u64);
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(F::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// Gauss-Jordan inverse.
    ///
    /// Exact fields pivot on the first nonzero entry of the column, `f64` on
    /// the entry of largest magnitude. Zero multipliers are skipped and not
    /// counted.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::dim("inv", self.dims(), self.dims()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let mut muls = 0u64;
        for c in 0..n {
            let pivot = find_pivot(&a, c, c).ok_or(Error::Singular)?;
            if pivot != c {
                a.swap_rows(pivot, c);
                inv.swap_rows(pivot, c);
            }
            let p_inv = a[(c, c)].inv().ok_or(Error::Singular)?;
            muls += 1;
            if !p_inv.is_one() {
                for j in c..n {
                    if !a[(c, j)].is_zero() {
                        a[(c, j)].mul_assign_ref(&p_inv);
                        muls += 1;
                    }
                }
                for j in 0..n {
                    if !inv[(c, j)].is_zero() {
                        inv[(c, j)].mul_assign_ref(&p_inv);
                        muls += 1;
                    }
                }
            }
            let a_pivot_row: Vec<(usize, F)> = nonzeros(&a.row(c)[c..], c);
            let inv_pivot_row: Vec<(usize, F)> = nonzeros(inv.row(c), 0);
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let factor = a[(r, c)].clone();
                for (j, v) in &a_pivot_row {
                    a[(r, *j)].sub_mul(&factor, v);
                }
                for (j, v) in &inv_pivot_row {
                    inv[(r, *j)].sub_mul(&factor, v);
                }
                muls += (a_pivot_row.len() + inv_pivot_row.len()) as u64;
            }
        }
        ops::count_muls(muls);
        ops::count_adds(muls);
        Ok(inv)
    }

    /// Rank by row reduction.
    pub fn rank(&self) -> usize {
        self.row_echelon().1.len()
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn row_echelon(&self) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for c in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = find_pivot(&a, row, c) else {
                continue;
            };
            a.swap_rows(p, row);
            let p_inv = a[(row, c)].inv().expect("nonzero pivot");
            for j in c..self.cols {
                a[(row, j)].mul_assign_ref(&p_inv);
            }
            for r in 0..self.rows {
                if r != row && !a[(r, c)].is_zero() {
                    let factor = a[(r, c)].clone();
                    for j in c..self.cols {
                        let v = a[(row, j)].clone();
                        a[(r, j)] = a[(r, j)].clone() - factor.clone() * v;
                    }
                }
            }
            pivots.push(c);
            row += 1;
        }
        (a, pivots)
    }

    /// Solves `self * x = b` for square nonsingular `self`.
    pub fn solve(&self, b: &[F]) -> Result<Vec<F>> {
        self.invert()?.mul_vec(b)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

fn nonzeros<F: Field>(row: &[F], offset: usize) -> Vec<(usize, F)> {
    row.iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| (j + offset, v.clone()))
        .collect()
}

fn find_pivot<F: Field>(a: &DenseMatrix<F>, from_row: usize, col: usize) -> Option<usize> {
    if F::EXACT {
        (from_row..a.rows).find(|&r| !a[(r, col)].is_zero())
    } else {
        let (best, mag) = (from_row..a.rows)
            .map(|r| (r, a[(r, col)].magnitude()))
            .fold((from_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        (mag > 0.0).then_some(best)
    }
}

impl<F> Index<(usize, usize)> for DenseMatrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for DenseMatrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<F: fmt::Display> fmt::Display for DenseMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.data[i * self.cols + j].to_string())
                .collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl<F: fmt::Debug> fmt::Debug for DenseMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[F]> = self.data.chunks(self.cols.max(1)).collect();
        write!(f, "DenseMatrix {}x{} {:?}", self.rows, self.cols, rows)
    }
}

/// A sparse additive change `Δ` to an `rows x cols` matrix.
///
/// Entries are the differences (new minus old). Zero differences are not
/// stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseDelta<F> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), F>,
}

impl<F: Field> SparseDelta<F> {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseDelta {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a delta from triples, rejecting duplicates and out-of-range
    /// positions.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, F)>,
    ) -> Result<Self> {
        let mut d = Self::new(rows, cols);
        for (i, j, v) in triples {
            if i >= rows || j >= cols {
                return Err(Error::InvalidInput(format!(
                    "delta entry ({i}, {j}) outside {rows}x{cols}"
                )));
            }
            if d.entries.contains_key(&(i, j)) {
                return Err(Error::InvalidInput(format!("duplicate delta entry ({i}, {j})")));
            }
            if !v.is_zero() {
                d.entries.insert((i, j), v);
            }
        }
        Ok(d)
    }

    /// Sets the difference at `(i, j)`, replacing any previous value.
    pub fn set(&mut self, i: usize, j: usize, value: F) {
        assert!(i < self.rows && j < self.cols, "delta entry out of range");
        if value.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), value);
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&F> {
        self.entries.get(&(i, j))
    }

    /// Entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &F)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn touched_columns(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.entries.keys().map(|&(_, j)| j).collect();
        set.into_iter().collect()
    }

    pub fn touched_rows(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.entries.keys().map(|&(i, _)| i).collect();
        set.into_iter().collect()
    }

    pub fn transpose(&self) -> Self {
        SparseDelta {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|(&(i, j), v)| ((j, i), v.clone())).collect(),
        }
    }

    /// `U`: the touched columns of the delta, densely, in increasing column
    /// order.
    pub fn u_factor(&self) -> DenseMatrix<F> {
        let cols = self.touched_columns();
        let mut u = DenseMatrix::zeros(self.rows, cols.len());
        for (i, j, v) in self.iter() {
            let t = cols.binary_search(&j).expect("touched column");
            u[(i, t)] = v.clone();
        }
        u
    }

    /// `V`: one unit column `e_j` per touched column `j`, so that
    /// `U * V^T` reproduces the delta.
    pub fn v_factor(&self) -> DenseMatrix<F> {
        let cols = self.touched_columns();
        let mut v = DenseMatrix::zeros(self.cols, cols.len());
        for (t, &j) in cols.iter().enumerate() {
            v[(j, t)] = F::one();
        }
        v
    }

    pub fn to_dense(&self) -> DenseMatrix<F> {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v.clone();
        }
        m
    }

    /// `m + Δ`.
    pub fn apply_to(&self, m: &DenseMatrix<F>) -> DenseMatrix<F> {
        let mut out = m.clone();
        self.add_into(&mut out);
        out
    }

    /// `m <- m + Δ`.
    pub fn add_into(&self, m: &mut DenseMatrix<F>) {
        assert_eq!(m.dims(), self.dims(), "delta dimensions");
        for (i, j, v) in self.iter() {
            m[(i, j)] = m[(i, j)].clone() + v.clone();
        }
    }
}
