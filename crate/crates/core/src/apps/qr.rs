//! Gram-Schmidt orthogonalization through a dynamic formula.
//!
//! With `D` the diagonal selector of an independent set `B` of columns of
//! `V`, the projector onto their span is
//!
//! ```text
//! P = V*D*inv(D*Vt*V*D + (I - D))*D*Vt
//! ```
//!
//! so column `i` of `(I - P)*V` is `v_i` minus its projection onto the
//! columns already accepted. Step `i` queries that column and, if it is
//! nonzero, sets `D[i][i] = 1`.

use crate::dyninv::ResetPolicy;
use crate::dynformula::{DynamicFormula, UpdateEvent};
use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::formula::{Assignment, Formula};
use crate::matrix::DenseMatrix;

pub fn formula_text(d: usize, n: usize) -> String {
    format!(
        "input V:{d}x{n}; input Vt:{n}x{d}; input D:{n}x{n}; \
         out (id({d}) - V*D*inv(D*Vt*V*D + (id({n}) - D))*D*Vt)*V"
    )
}

/// Output of the exact phase.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSchmidt<F> {
    /// columns `v'_i`; zero exactly for dependent columns
    pub orthogonal: DenseMatrix<F>,
    /// accepted column indices, increasing
    pub independent: Vec<usize>,
    /// `|B| x n`, with `V = V'_B * r`
    pub r: DenseMatrix<F>,
}

impl<F: Field> GramSchmidt<F> {
    /// Rank of each prefix `v_1..v_i`.
    pub fn rank_profile(&self) -> Vec<usize> {
        let n = self.orthogonal.cols();
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        for i in 0..n {
            if self.independent.binary_search(&i).is_ok() {
                k += 1;
            }
            out.push(k);
        }
        out
    }
}

fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Orthogonalizes the columns of `v` without normalizing them.
pub fn gram_schmidt<F: Field>(v: &DenseMatrix<F>, policy: ResetPolicy) -> Result<GramSchmidt<F>> {
    let (d, n) = v.dims();
    if d == 0 || n == 0 {
        return Err(Error::InvalidInput("matrix must be non-empty".into()));
    }
    let f = Formula::parse(&formula_text(d, n))?;
    let a = Assignment::new(&f, vec![v.clone(), v.transpose(), DenseMatrix::zeros(n, n)])?;
    let mut df = DynamicFormula::open(&f, &a, policy)?;
    let sel = df.input_index("D").expect("D");
    let mut cols: Vec<Vec<F>> = Vec::with_capacity(n);
    let mut independent = Vec::new();
    for i in 0..n {
        let col = df.get_column(i);
        if col.iter().any(|x| !x.is_zero()) {
            // accepted columns stay independent, so this cannot fail
            df.apply(&[UpdateEvent::entry(sel, i, i, F::one())])?;
            independent.push(i);
        }
        cols.push(col);
    }
    let orthogonal = DenseMatrix::from_fn(d, n, |r, c| cols[c][r].clone());
    let mut r = DenseMatrix::zeros(independent.len(), n);
    for (t, &j) in independent.iter().enumerate() {
        let norm = dot(&cols[j], &cols[j]);
        // only possible over a finite field
        let inv = norm
            .inv()
            .ok_or_else(|| Error::InvalidInput(format!("column {} is self-orthogonal", j + 1)))?;
        for i in 0..n {
            r[(t, i)] = dot(&cols[j], &v.column(i)) * inv.clone();
        }
    }
    Ok(GramSchmidt {
        orthogonal,
        independent,
        r,
    })
}

/// Orthonormal `Q` (`d x rank`) and `R` (`rank x n`) with `Q R = V`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatQr {
    pub q: DenseMatrix<f64>,
    pub r: DenseMatrix<f64>,
}

/// Normalizes the exact output in floating point.
pub fn finish(gs: &GramSchmidt<Rational>, v: &DenseMatrix<Rational>) -> FloatQr {
    let to_f = crate::field::to_f64;
    let d = gs.orthogonal.rows();
    let n = v.cols();
    let k = gs.independent.len();
    let mut q = DenseMatrix::zeros(d, k);
    for (t, &j) in gs.independent.iter().enumerate() {
        let col: Vec<f64> = gs.orthogonal.column(j).iter().map(to_f).collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (i, x) in col.into_iter().enumerate() {
            q[(i, t)] = x / norm;
        }
    }
    let vf = v.map(to_f);
    let r = DenseMatrix::from_fn(k, n, |t, i| dot(&q.column(t), &vf.column(i)));
    FloatQr { q, r }
}

fn selector_diag<F: Field>(n: usize, set: &[usize]) -> DenseMatrix<F> {
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j && set.contains(&i) {
            F::one()
        } else {
            F::zero()
        }
    })
}

/// `D Vt V D + (I - D)` for the selector `D` of `set`.
pub fn blown_up_gram<F: Field>(v: &DenseMatrix<F>, set: &[usize]) -> DenseMatrix<F> {
    let n = v.cols();
    let g = v.transpose().multiply(v).expect("square Gram matrix");
    DenseMatrix::from_fn(n, n, |i, j| {
        if set.contains(&i) && set.contains(&j) {
            g[(i, j)].clone()
        } else if i == j {
            F::one()
        } else {
            F::zero()
        }
    })
}

/// Orthogonal projector onto the span of the columns of `v` listed in
/// `set`. Fails with `Singular` if those columns are dependent.
pub fn projector<F: Field>(v: &DenseMatrix<F>, set: &[usize]) -> Result<DenseMatrix<F>> {
    let n = v.cols();
    if set.iter().any(|&j| j >= n) {
        return Err(Error::InvalidInput(format!("column index outside 0..{n}")));
    }
    let d = selector_diag::<F>(n, set);
    let inner = blown_up_gram(v, set).invert()?;
    let vd = v.multiply(&d)?;
    vd.multiply(&inner)?.multiply(&vd.transpose())
}
