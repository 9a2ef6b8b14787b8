//! Dynamic matrix inverse.
//!
//! [`SmwInverse`] stores `M^-1` and a temporary delta `Δ = U V^T`, where `U`
//! holds the touched columns of `Δ` and `V` selects them. Queries use the
//! Woodbury identity
//!
//! ```text
//! (M + U V^T)^-1 = M^-1 - M^-1 U (I + V^T M^-1 U)^-1 V^T M^-1
//! ```
//!
//! evaluated right to left, so only the `k x k` capacitance matrix
//! `I + V^T M^-1 U` is ever inverted during an update. `reset` folds the
//! delta into `M` and recomputes `M^-1` with the same identity.
//!
//! [`NaiveInverse`] recomputes the inverse on every update and serves as the
//! reference implementation in differential tests.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{DenseMatrix, SparseDelta};
use crate::ops;

/// Common surface of the dynamic inverse backends.
pub trait InverseBackend<F: Field> {
    fn dim(&self) -> usize;

    /// Replaces the current delta. On error the previous delta stays in
    /// effect.
    fn update(&mut self, delta: SparseDelta<F>) -> Result<()>;

    /// `((M + Δ)^-1)[rows, col]`.
    fn query_column(&self, rows: &[usize], col: usize) -> Vec<F>;

    /// `((M + Δ)^-1)[row, cols]`.
    fn query_row(&self, row: usize, cols: &[usize]) -> Vec<F>;

    /// `M <- M + Δ`, `Δ <- 0`.
    fn reset(&mut self);

    /// The current base matrix `M`.
    fn base(&self) -> &DenseMatrix<F>;

    /// The current delta.
    fn delta(&self) -> &SparseDelta<F>;
}

/// Whether the Woodbury factors are built from touched columns or touched
/// rows of the delta.
///
/// Row orientation runs the column engine on the transposed matrix, which
/// keeps `k` small for row updates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    #[default]
    Columns,
    Rows,
}

/// Woodbury state on an internally oriented matrix.
#[derive(Clone, Debug)]
struct Engine<F> {
    m: DenseMatrix<F>,
    minv: DenseMatrix<F>,
    delta: SparseDelta<F>,
    /// touched columns of `delta`, increasing
    cols: Vec<usize>,
    /// `M^-1 U`, `n x k`
    minv_u: DenseMatrix<F>,
    /// `(I + V^T M^-1 U)^-1`, `k x k`
    cap_inv: DenseMatrix<F>,
}

impl<F: Field> Engine<F> {
    fn new(m: DenseMatrix<F>) -> Result<Self> {
        let minv = m.invert()?;
        let n = m.rows();
        Ok(Engine {
            m,
            minv,
            delta: SparseDelta::new(n, n),
            cols: Vec::new(),
            minv_u: DenseMatrix::zeros(n, 0),
            cap_inv: DenseMatrix::zeros(0, 0),
        })
    }

    fn n(&self) -> usize {
        self.m.rows()
    }

    fn update(&mut self, delta: SparseDelta<F>) -> Result<()> {
        let n = self.n();
        if delta.dims() != (n, n) {
            return Err(Error::dim("update", (n, n), delta.dims()));
        }
        let cols = delta.touched_columns();
        let k = cols.len();
        // M^-1 U from the sparse entries: n multiplications per entry
        let mut minv_u = DenseMatrix::<F>::zeros(n, k);
        let mut muls = 0u64;
        for (r, c, v) in delta.iter() {
            let t = cols.binary_search(&c).expect("touched column");
            for i in 0..n {
                let a = &self.minv[(i, r)];
                if !a.is_zero() {
                    minv_u[(i, t)].add_mul(a, v);
                    muls += 1;
                }
            }
        }
        ops::count_muls(muls);
        ops::count_adds(muls);
        // V^T M^-1 U selects rows `cols` of M^-1 U
        let cap = DenseMatrix::from_fn(k, k, |s, t| {
            let sel = minv_u[(cols[s], t)].clone();
            if s == t {
                F::one() + sel
            } else {
                sel
            }
        });
        let cap_inv = cap.invert()?;
        self.delta = delta;
        self.cols = cols;
        self.minv_u = minv_u;
        self.cap_inv = cap_inv;
        Ok(())
    }

    /// `(M^-1)[rows, j] - (M^-1 U)[rows, :] · capInv · (V^T M^-1 e_j)`.
    fn query_column(&self, rows: &[usize], j: usize) -> Vec<F> {
        let k = self.cols.len();
        if k == 0 {
            return rows.iter().map(|&i| self.minv[(i, j)].clone()).collect();
        }
        let y: Vec<F> = self.cols.iter().map(|&c| self.minv[(c, j)].clone()).collect();
        let w = dense_mul_vec(&self.cap_inv, &y);
        rows.iter()
            .map(|&i| {
                let corr = sparse_dot(self.minv_u.row(i), &w);
                self.minv[(i, j)].clone() - corr
            })
            .collect()
    }

    /// `(M^-1)[i, cols] - ((M^-1 U)[i, :] · capInv) · (V^T M^-1)[:, cols]`.
    fn query_row(&self, i: usize, cols: &[usize]) -> Vec<F> {
        let k = self.cols.len();
        if k == 0 {
            return cols.iter().map(|&j| self.minv[(i, j)].clone()).collect();
        }
        let w = dense_vec_mul(self.minv_u.row(i), &self.cap_inv);
        cols.iter()
            .map(|&j| {
                let y: Vec<F> = self.cols.iter().map(|&c| self.minv[(c, j)].clone()).collect();
                self.minv[(i, j)].clone() - sparse_dot(&w, &y)
            })
            .collect()
    }

    fn reset(&mut self) {
        if self.delta.is_empty() {
            return;
        }
        let n = self.n();
        let k = self.cols.len();
        // W = capInv · V^T M^-1, k x n
        let mut w = DenseMatrix::<F>::zeros(k, n);
        let mut muls = 0u64;
        for s in 0..k {
            for t in 0..k {
                let c = &self.cap_inv[(s, t)];
                if c.is_zero() {
                    continue;
                }
                let src = self.cols[t];
                for j in 0..n {
                    let v = &self.minv[(src, j)];
                    if !v.is_zero() {
                        w[(s, j)].add_mul(c, v);
                        muls += 1;
                    }
                }
            }
        }
        // M^-1 <- M^-1 - (M^-1 U) W
        let w_rows: Vec<Vec<(usize, F)>> = (0..k)
            .map(|s| {
                w.row(s)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.clone()))
                    .collect()
            })
            .collect();
        for i in 0..n {
            for (s, row) in w_rows.iter().enumerate() {
                let a = self.minv_u[(i, s)].clone();
                if a.is_zero() {
                    continue;
                }
                let target = self.minv.row_mut(i);
                for (j, v) in row {
                    target[*j].sub_mul(&a, v);
                }
                muls += row.len() as u64;
            }
        }
        ops::count_muls(muls);
        ops::count_adds(muls);
        self.delta.add_into(&mut self.m);
        self.delta = SparseDelta::new(n, n);
        self.cols.clear();
        self.minv_u = DenseMatrix::zeros(n, 0);
        self.cap_inv = DenseMatrix::zeros(0, 0);
    }
}

fn sparse_dot<F: Field>(a: &[F], b: &[F]) -> F {
    let mut acc = F::zero();
    let mut muls = 0u64;
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc.add_mul(x, y);
            muls += 1;
        }
    }
    ops::count_muls(muls);
    ops::count_adds(muls);
    acc
}

fn dense_mul_vec<F: Field>(m: &DenseMatrix<F>, v: &[F]) -> Vec<F> {
    (0..m.rows()).map(|i| sparse_dot(m.row(i), v)).collect()
}

fn dense_vec_mul<F: Field>(v: &[F], m: &DenseMatrix<F>) -> Vec<F> {
    (0..m.cols())
        .map(|j| {
            let col = m.column(j);
            sparse_dot(v, &col)
        })
        .collect()
}

/// Sherman-Morrison-Woodbury dynamic inverse.
#[derive(Clone, Debug)]
pub struct SmwInverse<F> {
    orientation: Orientation,
    engine: Engine<F>,
    /// `M` and `Δ` in caller orientation
    base: DenseMatrix<F>,
    delta: SparseDelta<F>,
}

impl<F: Field> SmwInverse<F> {
    /// Computes `M^-1`; fails if `M` is singular.
    pub fn preprocess(m: DenseMatrix<F>) -> Result<Self> {
        Self::with_orientation(m, Orientation::Columns)
    }

    pub fn with_orientation(m: DenseMatrix<F>, orientation: Orientation) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dim("preprocess", m.dims(), m.dims()));
        }
        let n = m.rows();
        let inner = match orientation {
            Orientation::Columns => m.clone(),
            Orientation::Rows => m.transpose(),
        };
        Ok(SmwInverse {
            orientation,
            engine: Engine::new(inner)?,
            base: m,
            delta: SparseDelta::new(n, n),
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Stored `M^-1` (in caller orientation).
    pub fn base_inverse(&self) -> DenseMatrix<F> {
        match self.orientation {
            Orientation::Columns => self.engine.minv.clone(),
            Orientation::Rows => self.engine.minv.transpose(),
        }
    }

    /// Capacitance inverse `(I + V^T M^-1 U)^-1` of the current delta.
    pub fn capacitance_inverse(&self) -> &DenseMatrix<F> {
        &self.engine.cap_inv
    }

    /// Capacitance matrix `I + V^T M^-1 U` of the current delta.
    pub fn capacitance(&self) -> DenseMatrix<F> {
        let cols = &self.engine.cols;
        let k = cols.len();
        DenseMatrix::from_fn(k, k, |s, t| {
            let sel = self.engine.minv_u[(cols[s], t)].clone();
            if s == t {
                F::one() + sel
            } else {
                sel
            }
        })
    }

    /// Number of touched columns (rows, in row orientation) of the delta.
    pub fn rank(&self) -> usize {
        self.engine.cols.len()
    }
}

impl<F: Field> InverseBackend<F> for SmwInverse<F> {
    fn dim(&self) -> usize {
        self.base.rows()
    }

    fn update(&mut self, delta: SparseDelta<F>) -> Result<()> {
        let inner = match self.orientation {
            Orientation::Columns => delta.clone(),
            Orientation::Rows => delta.transpose(),
        };
        self.engine.update(inner)?;
        self.delta = delta;
        Ok(())
    }

    fn query_column(&self, rows: &[usize], col: usize) -> Vec<F> {
        match self.orientation {
            Orientation::Columns => self.engine.query_column(rows, col),
            Orientation::Rows => self.engine.query_row(col, rows),
        }
    }

    fn query_row(&self, row: usize, cols: &[usize]) -> Vec<F> {
        match self.orientation {
            Orientation::Columns => self.engine.query_row(row, cols),
            Orientation::Rows => self.engine.query_column(cols, row),
        }
    }

    fn reset(&mut self) {
        if self.delta.is_empty() {
            return;
        }
        self.engine.reset();
        self.delta.add_into(&mut self.base);
        let n = self.base.rows();
        self.delta = SparseDelta::new(n, n);
    }

    fn base(&self) -> &DenseMatrix<F> {
        &self.base
    }

    fn delta(&self) -> &SparseDelta<F> {
        &self.delta
    }
}

/// Recomputes `(M + Δ)^-1` from scratch on every update.
#[derive(Clone, Debug)]
pub struct NaiveInverse<F> {
    base: DenseMatrix<F>,
    delta: SparseDelta<F>,
    inverse: DenseMatrix<F>,
}

impl<F: Field> NaiveInverse<F> {
    pub fn preprocess(m: DenseMatrix<F>) -> Result<Self> {
        let inverse = m.invert()?;
        let n = m.rows();
        Ok(NaiveInverse {
            base: m,
            delta: SparseDelta::new(n, n),
            inverse,
        })
    }
}

impl<F: Field> InverseBackend<F> for NaiveInverse<F> {
    fn dim(&self) -> usize {
        self.base.rows()
    }

    fn update(&mut self, delta: SparseDelta<F>) -> Result<()> {
        if delta.dims() != self.base.dims() {
            return Err(Error::dim("update", self.base.dims(), delta.dims()));
        }
        self.inverse = delta.apply_to(&self.base).invert()?;
        self.delta = delta;
        Ok(())
    }

    fn query_column(&self, rows: &[usize], col: usize) -> Vec<F> {
        rows.iter().map(|&i| self.inverse[(i, col)].clone()).collect()
    }

    fn query_row(&self, row: usize, cols: &[usize]) -> Vec<F> {
        cols.iter().map(|&j| self.inverse[(row, j)].clone()).collect()
    }

    fn reset(&mut self) {
        self.delta.add_into(&mut self.base);
        let n = self.base.rows();
        self.delta = SparseDelta::new(n, n);
    }

    fn base(&self) -> &DenseMatrix<F> {
        &self.base
    }

    fn delta(&self) -> &SparseDelta<F> {
        &self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResetMode {
    /// Count changed entries.
    Entries,
    /// Count changed columns.
    Columns,
}

/// Decides when accumulated changes are folded into the base matrix.
///
/// With exponent `x`, a reset fires once the accumulated count reaches
/// `ceil(n^x)`. No exponent means never.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResetPolicy {
    pub mode: ResetMode,
    pub exponent: Option<f64>,
    /// Overrides the `n` the threshold is computed from.
    pub scale: Option<usize>,
}

impl ResetPolicy {
    pub fn entries(x: f64) -> Self {
        assert!((0.0..=1.0).contains(&x), "reset exponent must lie in [0, 1]");
        ResetPolicy {
            mode: ResetMode::Entries,
            exponent: Some(x),
            scale: None,
        }
    }

    pub fn columns(x: f64) -> Self {
        assert!((0.0..=1.0).contains(&x), "reset exponent must lie in [0, 1]");
        ResetPolicy {
            mode: ResetMode::Columns,
            exponent: Some(x),
            scale: None,
        }
    }

    /// Resets after every change (threshold 1).
    pub fn always() -> Self {
        Self::entries(0.0)
    }

    pub fn never() -> Self {
        ResetPolicy {
            mode: ResetMode::Entries,
            exponent: None,
            scale: None,
        }
    }

    pub fn with_scale(mut self, n: usize) -> Self {
        self.scale = Some(n);
        self
    }

    /// `ceil(n^x)`, or `None` for a policy that never fires.
    pub fn threshold(&self, n: usize) -> Option<usize> {
        let x = self.exponent?;
        let n = self.scale.unwrap_or(n).max(1) as f64;
        let v = n.powf(x);
        let r = v.round();
        // n^x that is an integer up to rounding noise
        let t = if (v - r).abs() < 1e-9 { r } else { v.ceil() };
        Some((t as usize).max(1))
    }

    pub fn fires(&self, n: usize, entries: usize, columns: usize) -> bool {
        let Some(t) = self.threshold(n) else {
            return false;
        };
        match self.mode {
            ResetMode::Entries => entries >= t,
            ResetMode::Columns => columns >= t,
        }
    }
}
