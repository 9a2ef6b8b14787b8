//! Generators and reference implementations shared by the integration
//! tests. Nothing here calls into the library's arithmetic kernels.

#![allow(dead_code)]

use matformula::field::{modulus, ratio};
use matformula::{DenseMatrix, Field, Rational, Zp};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<u64>>;

// ---------------------------------------------------------------- mod p

pub fn p() -> u64 {
    modulus()
}

pub fn addm(a: u64, b: u64) -> u64 {
    ((a as u128 + b as u128) % p() as u128) as u64
}

pub fn subm(a: u64, b: u64) -> u64 {
    addm(a, p() - b % p())
}

pub fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % p() as u128) as u64
}

pub fn powm(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a);
        }
        a = mulm(a, a);
        e >>= 1;
    }
    r
}

/// Fermat inverse.
pub fn invm(a: u64) -> u64 {
    powm(a, p() - 2)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0; c]; r]
}

pub fn eye(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u64).collect()).collect()
}

pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| addm(*u, *v)).collect())
        .collect()
}

pub fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| subm(*u, *v)).collect())
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut acc: u128 = 0;
            for t in 0..k {
                acc = (acc + a[i][t] as u128 * b[t][j] as u128) % p() as u128;
            }
            out[i][j] = acc as u64;
        }
    }
    out
}

/// Gauss-Jordan on `[a | I]`, `None` if singular.
pub fn mat_inv(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut m: Vec<Vec<u64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| (i == j) as u64));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| m[r][c] != 0)?;
        m.swap(piv, c);
        let f = invm(m[c][c]);
        for v in m[c].iter_mut() {
            *v = mulm(*v, f);
        }
        for r in 0..n {
            if r != c && m[r][c] != 0 {
                let f = m[r][c];
                for j in 0..2 * n {
                    let t = mulm(f, m[c][j]);
                    m[r][j] = subm(m[r][j], t);
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_rank(a: &Mat) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(piv, rank);
        let f = invm(m[rank][c]);
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let g = mulm(m[r][c], f);
                for j in 0..cols {
                    let t = mulm(g, m[rank][j]);
                    m[r][j] = subm(m[r][j], t);
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    (0..r).map(|_| (0..c).map(|_| rng.gen_range(0..p())).collect()).collect()
}

pub fn to_dense(m: &Mat) -> DenseMatrix<Zp> {
    let r = m.len();
    let c = m.first().map_or(0, |x| x.len());
    DenseMatrix::from_fn(r, c, |i, j| Zp::new(m[i][j]))
}

pub fn from_dense(m: &DenseMatrix<Zp>) -> Mat {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.value()).collect()).collect()
}

// ------------------------------------------------------- random formulas

#[derive(Clone, Debug)]
pub enum Expr {
    Input(usize),
    Id(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Inv(Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct RandomFormula {
    /// `(rows, cols)` per input, named `M0`, `M1`, ...
    pub inputs: Vec<(usize, usize)>,
    pub root: Expr,
    pub rows: usize,
    pub cols: usize,
}

impl Expr {
    pub fn gates(&self) -> usize {
        match self {
            Expr::Input(_) | Expr::Id(_) => 0,
            Expr::Inv(a) => 1 + a.gates(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => 1 + a.gates() + b.gates(),
        }
    }

    pub fn inv_depth(&self) -> usize {
        match self {
            Expr::Input(_) | Expr::Id(_) => 0,
            Expr::Inv(a) => 1 + a.inv_depth(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.inv_depth().max(b.inv_depth()),
        }
    }

    fn render(&self, out: &mut String) {
        match self {
            Expr::Input(k) => out.push_str(&format!("M{k}")),
            Expr::Id(n) => out.push_str(&format!("id({n})")),
            Expr::Inv(a) => {
                out.push_str("inv(");
                a.render(out);
                out.push(')');
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    _ => " * ",
                };
                out.push('(');
                a.render(out);
                out.push_str(op);
                b.render(out);
                out.push(')');
            }
        }
    }

    /// `None` when some inverted matrix is singular.
    pub fn eval(&self, vals: &[Mat]) -> Option<Mat> {
        Some(match self {
            Expr::Input(k) => vals[*k].clone(),
            Expr::Id(n) => eye(*n),
            Expr::Inv(a) => mat_inv(&a.eval(vals)?)?,
            Expr::Add(a, b) => mat_add(&a.eval(vals)?, &b.eval(vals)?),
            Expr::Sub(a, b) => mat_sub(&a.eval(vals)?, &b.eval(vals)?),
            Expr::Mul(a, b) => mat_mul(&a.eval(vals)?, &b.eval(vals)?),
        })
    }
}

impl RandomFormula {
    pub fn dsl(&self) -> String {
        let mut s = String::new();
        for (k, (r, c)) in self.inputs.iter().enumerate() {
            s.push_str(&format!("input M{k}:{r}x{c};\n"));
        }
        s.push_str("out ");
        self.root.render(&mut s);
        s.push('\n');
        s
    }

    pub fn eval(&self, vals: &[Mat]) -> Option<Mat> {
        self.root.eval(vals)
    }

    /// `sum (rows + cols)` over all leaves and gates.
    pub fn size_bound(&self) -> usize {
        fn walk(e: &Expr, f: &RandomFormula) -> (usize, usize, usize) {
            match e {
                Expr::Input(k) => {
                    let (r, c) = f.inputs[*k];
                    (r, c, r + c)
                }
                Expr::Id(n) => (*n, *n, 2 * n),
                Expr::Inv(a) => {
                    let (r, c, s) = walk(a, f);
                    (r, c, s + r + c)
                }
                Expr::Add(a, b) | Expr::Sub(a, b) => {
                    let (r, c, s) = walk(a, f);
                    let (_, _, t) = walk(b, f);
                    (r, c, s + t + r + c)
                }
                Expr::Mul(a, b) => {
                    let (r, _, s) = walk(a, f);
                    let (_, c, t) = walk(b, f);
                    (r, c, s + t + r + c)
                }
            }
        }
        walk(&self.root, self).2
    }

    pub fn random_values(&self, rng: &mut ChaCha8Rng) -> Vec<Mat> {
        self.inputs.iter().map(|&(r, c)| random_mat(rng, r, c)).collect()
    }

    /// Random values on which the formula is executable, if found within
    /// `tries` draws.
    pub fn executable_values(&self, rng: &mut ChaCha8Rng, tries: usize) -> Option<Vec<Mat>> {
        (0..tries).map(|_| self.random_values(rng)).find(|v| self.eval(v).is_some())
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    inputs: Vec<(usize, usize)>,
    max_dim: usize,
}

impl Gen<'_> {
    fn leaf(&mut self, r: usize, c: usize) -> Expr {
        if r == c && self.rng.gen_bool(0.1) {
            return Expr::Id(r);
        }
        let same: Vec<usize> = (0..self.inputs.len()).filter(|&k| self.inputs[k] == (r, c)).collect();
        if !same.is_empty() && self.rng.gen_bool(0.3) {
            return Expr::Input(same[self.rng.gen_range(0..same.len())]);
        }
        self.inputs.push((r, c));
        Expr::Input(self.inputs.len() - 1)
    }

    fn expr(&mut self, r: usize, c: usize, budget: usize) -> Expr {
        if budget == 0 || self.rng.gen_bool(0.15) {
            return self.leaf(r, c);
        }
        let choice = self.rng.gen_range(0..4);
        match choice {
            0 if r == c => Expr::Inv(Box::new(self.expr(r, c, budget - 1))),
            1 => {
                let k = self.rng.gen_range(1..=self.max_dim);
                let lb = self.rng.gen_range(0..budget);
                let l = self.expr(r, k, lb);
                let rr = self.expr(k, c, budget - 1 - lb);
                Expr::Mul(Box::new(l), Box::new(rr))
            }
            _ => {
                let lb = self.rng.gen_range(0..budget);
                let l = self.expr(r, c, lb);
                let rr = self.expr(r, c, budget - 1 - lb);
                if self.rng.gen_bool(0.5) {
                    Expr::Add(Box::new(l), Box::new(rr))
                } else {
                    Expr::Sub(Box::new(l), Box::new(rr))
                }
            }
        }
    }
}

/// A random formula with at most `max_gates` gates and dimensions at most
/// `max_dim`.
pub fn random_formula(rng: &mut ChaCha8Rng, max_gates: usize, max_dim: usize) -> RandomFormula {
    let r = rng.gen_range(1..=max_dim);
    let c = if rng.gen_bool(0.5) { r } else { rng.gen_range(1..=max_dim) };
    let budget = rng.gen_range(0..=max_gates);
    let mut g = Gen {
        rng,
        inputs: Vec::new(),
        max_dim,
    };
    let root = g.expr(r, c, budget);
    let inputs = g.inputs;
    RandomFormula { inputs, root, rows: r, cols: c }
}

/// `inv(A + inv(B * inv(C)))`-shaped formulas with random subterms.
pub fn triple_inverse_formula(rng: &mut ChaCha8Rng, max_dim: usize) -> RandomFormula {
    let n = rng.gen_range(1..=max_dim);
    let mut g = Gen {
        rng,
        inputs: Vec::new(),
        max_dim,
    };
    let c = g.leaf(n, n);
    let b = g.expr(n, n, 1);
    let a = g.leaf(n, n);
    let inner = Expr::Inv(Box::new(Expr::Mul(Box::new(b), Box::new(Expr::Inv(Box::new(c))))));
    let root = Expr::Inv(Box::new(Expr::Add(Box::new(a), Box::new(inner))));
    RandomFormula {
        inputs: g.inputs,
        root,
        rows: n,
        cols: n,
    }
}

// ------------------------------------------------------------- rationals

pub fn q(n: i64, d: i64) -> Rational {
    ratio(n, d)
}

pub type QMat = Vec<Vec<Rational>>;

pub fn qzero() -> Rational {
    q(0, 1)
}

/// Solves `a x = b` by Gaussian elimination, `None` if singular.
pub fn q_solve(a: &QMat, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: QMat = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut row = r.clone();
            row.push(v.clone());
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| m[r][c] != qzero())?;
        m.swap(piv, c);
        for r in 0..n {
            if r != c && m[r][c] != qzero() {
                let f = m[r][c].clone() / m[c][c].clone();
                for j in c..=n {
                    let t = f.clone() * m[c][j].clone();
                    m[r][j] = m[r][j].clone() - t;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n].clone() / m[i][i].clone()).collect())
}

pub fn q_rank(a: &QMat) -> usize {
    let mut m = a.clone();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != qzero()) else {
            continue;
        };
        m.swap(piv, rank);
        for r in 0..rows {
            if r != rank && m[r][c] != qzero() {
                let f = m[r][c].clone() / m[rank][c].clone();
                for j in 0..cols {
                    let t = f.clone() * m[rank][j].clone();
                    m[r][j] = m[r][j].clone() - t;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn q_dense(m: &QMat) -> DenseMatrix<Rational> {
    DenseMatrix::from_rows(m.clone()).expect("rectangular")
}

pub fn q_columns(m: &QMat, cols: &[usize]) -> QMat {
    m.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect()
}

pub fn q_dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(qzero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

// ------------------------------------------------------------ LP oracles

#[derive(Clone, Debug)]
pub struct RandomLp {
    pub a: QMat,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
    /// a feasible starting basis
    pub basis: Vec<usize>,
}

/// `A` with small integer entries, `b = A_B x_B` for a random basis `B`
/// and `x_B > 0`.
pub fn random_lp(rng: &mut ChaCha8Rng, max_d: usize, max_n: usize) -> RandomLp {
    loop {
        let d = rng.gen_range(1..=max_d);
        let n = rng.gen_range(d + 1..=max_n.max(d + 1));
        let a: QMat = (0..d)
            .map(|_| (0..n).map(|_| q(rng.gen_range(-3..=9), 1)).collect())
            .collect();
        let mut basis: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            basis.swap(i, rng.gen_range(0..=i));
        }
        basis.truncate(d);
        let ab = q_columns(&a, &basis);
        if q_rank(&ab) < d {
            continue;
        }
        let xb: Vec<Rational> = (0..d).map(|_| q(rng.gen_range(1..=6), 1)).collect();
        let b: Vec<Rational> = ab.iter().map(|row| q_dot(row, &xb)).collect();
        let c: Vec<Rational> = (0..n).map(|_| q(rng.gen_range(-5..=5), 1)).collect();
        return RandomLp { a, b, c, basis };
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TwinOutcome {
    Optimal { objective: Rational, basis: Vec<usize>, pivots: Vec<(usize, usize)> },
    Unbounded { pivots: Vec<(usize, usize)> },
}

/// Dense tableau simplex with Bland's rule and least-index ratio ties.
pub fn tableau_simplex(lp: &RandomLp) -> TwinOutcome {
    let d = lp.a.len();
    let n = lp.c.len();
    // rows 0..d: [A | b] in canonical form w.r.t. basis
    let mut t: QMat = lp
        .a
        .iter()
        .zip(&lp.b)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut basis = lp.basis.clone();
    let pivot_on = |t: &mut QMat, r: usize, j: usize| {
        let f = t[r][j].clone();
        for v in t[r].iter_mut() {
            *v = v.clone() / f.clone();
        }
        for i in 0..t.len() {
            if i != r && t[i][j] != qzero() {
                let g = t[i][j].clone();
                for k in 0..=n {
                    let s = g.clone() * t[r][k].clone();
                    t[i][k] = t[i][k].clone() - s;
                }
            }
        }
    };
    for (r, &j) in basis.clone().iter().enumerate() {
        let piv = (r..d).find(|&i| t[i][j] != qzero()).expect("basis nonsingular");
        t.swap(piv, r);
        pivot_on(&mut t, r, j);
    }
    let mut pivots = Vec::new();
    loop {
        // reduced cost c_j - c_B^T column_j
        let reduced = |t: &QMat, basis: &[usize], j: usize| {
            let mut v = lp.c[j].clone();
            for r in 0..d {
                v = v - lp.c[basis[r]].clone() * t[r][j].clone();
            }
            v
        };
        let entering = (0..n).find(|j| !basis.contains(j) && reduced(&t, &basis, *j) > qzero());
        let Some(j) = entering else {
            let objective = (0..d).fold(qzero(), |acc, r| acc + lp.c[basis[r]].clone() * t[r][n].clone());
            return TwinOutcome::Optimal { objective, basis, pivots };
        };
        let mut best: Option<(Rational, usize)> = None;
        for r in 0..d {
            if t[r][j] > qzero() {
                let ratio = t[r][n].clone() / t[r][j].clone();
                let better = match &best {
                    None => true,
                    Some((b, br)) => ratio < *b || (ratio == *b && basis[r] < basis[*br]),
                };
                if better {
                    best = Some((ratio, r));
                }
            }
        }
        let Some((_, r)) = best else {
            return TwinOutcome::Unbounded { pivots };
        };
        pivots.push((j, basis[r]));
        pivot_on(&mut t, r, j);
        basis[r] = j;
    }
}

/// Feasible basic solutions by enumerating all `d`-subsets; returns
/// `(distinct vertices, best objective)`.
pub fn vertex_enumeration(lp: &RandomLp) -> (Vec<Vec<Rational>>, Option<Rational>) {
    let d = lp.a.len();
    let n = lp.c.len();
    let mut vertices: Vec<Vec<Rational>> = Vec::new();
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let ab = q_columns(&lp.a, &subset);
        if let Some(xb) = q_solve(&ab, &lp.b) {
            if xb.iter().all(|v| *v >= qzero()) {
                let mut x = vec![qzero(); n];
                for (t, &j) in subset.iter().enumerate() {
                    x[j] = xb[t].clone();
                }
                if !vertices.contains(&x) {
                    vertices.push(x);
                }
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                let best = vertices.iter().map(|x| q_dot(&lp.c, x)).max();
                return (vertices, best);
            }
            i -= 1;
            if subset[i] < n - d + i {
                subset[i] += 1;
                for k in i + 1..d {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn lp_text(lp: &RandomLp) -> String {
    let row = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = format!("{} {}\n", lp.a.len(), lp.c.len());
    for r in &lp.a {
        s.push_str(&row(r));
        s.push('\n');
    }
    s.push_str(&row(&lp.b));
    s.push('\n');
    s.push_str(&row(&lp.c));
    s.push('\n');
    s
}

pub fn zp_is_zero(z: &Zp) -> bool {
    Field::is_zero(z)
}
