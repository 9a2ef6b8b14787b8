//! Compiles a [`Formula`] into a symbolic block matrix `N` and index sets
//! `I`, `J` such that `(N(A_1..A_p)^-1)[I, J] = f(A_1..A_p)` whenever the
//! formula is executable on `A_1..A_p`.
//!
//! Gadgets, with `L`, `R` (or `N'`) the child layouts and `I_X`, `J_X` the
//! child output index sets:
//!
//! ```text
//! leaf      [ I_n   M  ]          I = rows of I_n, J = columns of M
//!           [ 0    -I_m]
//!
//! inverse   [ N'               -I[:, J'] ]   output: bottom-right block
//!           [ I[I', :]          0        ]
//!
//! add/sub   [ L  0   I[:, J_L]   0  ]        output: last block row,
//!           [ 0  R  ±I[:, J_R]   0  ]        third block column
//!           [ 0  0  -I           0  ]
//!           [ I[I_L,:] I[I_R,:] 0 -I]
//!
//! product   [ L  -I[:, J_L] I[I_R, :] ]      output: rows I_L, columns J_R
//!           [ 0   R                   ]      of the top-right block
//! ```
//!
//! Layouts are built as a tree of frames with relative offsets and
//! materialized once at the end.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::formula::{Assignment, Formula, NodeId, NodeKind};
use crate::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Where one input node's block sits inside `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub input: usize,
    pub node: NodeId,
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
    pub sign: Sign,
}

/// Gadget layout tree. Offsets of children are relative to the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct GadgetFrame {
    pub kind: FrameKind,
    pub node: NodeId,
    pub size: usize,
    pub out_rows: Vec<usize>,
    pub out_cols: Vec<usize>,
    /// `(offset, frame)`; the child occupies rows and columns
    /// `offset..offset + frame.size`.
    pub children: Vec<(usize, GadgetFrame)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    Leaf,
    Inv,
    Add,
    Sub,
    Mul,
}

/// The compiled symbolic block matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledFormula<F> {
    size: usize,
    constants: Vec<(usize, usize, F)>,
    placements: Vec<Vec<Placement>>,
    out_rows: Vec<usize>,
    out_cols: Vec<usize>,
    layout: Option<GadgetFrame>,
    writes: usize,
}

impl<F: Field> CompiledFormula<F> {
    /// A symbolic block matrix given directly by its fixed entries and symbol
    /// blocks. Symbol blocks must not overlap each other or a fixed entry.
    pub fn from_blocks(
        size: usize,
        constants: Vec<(usize, usize, F)>,
        placements: Vec<Vec<Placement>>,
        out_rows: Vec<usize>,
        out_cols: Vec<usize>,
    ) -> Result<Self> {
        let mut used = std::collections::HashSet::new();
        for p in placements.iter().flatten() {
            if p.row + p.rows > size || p.col + p.cols > size {
                return Err(Error::InvalidInput("symbol block outside the matrix".into()));
            }
            for i in 0..p.rows {
                for j in 0..p.cols {
                    if !used.insert((p.row + i, p.col + j)) {
                        return Err(Error::InvalidInput("symbol blocks overlap".into()));
                    }
                }
            }
        }
        for (i, j, _) in &constants {
            if *i >= size || *j >= size || used.contains(&(*i, *j)) {
                return Err(Error::InvalidInput(format!("fixed entry ({i}, {j}) invalid")));
            }
        }
        if out_rows.iter().chain(&out_cols).any(|&x| x >= size) {
            return Err(Error::InvalidInput("output index outside the matrix".into()));
        }
        let writes = constants.len() + placements.iter().flatten().map(|p| p.rows * p.cols).sum::<usize>();
        Ok(CompiledFormula {
            size,
            constants,
            placements,
            out_rows,
            out_cols,
            layout: None,
            writes,
        })
    }

    /// Dimension of `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Nonzero fixed entries of `N`.
    pub fn constants(&self) -> &[(usize, usize, F)] {
        &self.constants
    }

    /// Placements of every input node bound to input `k`.
    pub fn placements(&self, k: usize) -> &[Placement] {
        &self.placements[k]
    }

    pub fn all_placements(&self) -> impl Iterator<Item = &Placement> {
        self.placements.iter().flatten()
    }

    pub fn output_rows(&self) -> &[usize] {
        &self.out_rows
    }

    pub fn output_cols(&self) -> &[usize] {
        &self.out_cols
    }

    /// Gadget tree, absent for matrices built with [`Self::from_blocks`].
    pub fn layout(&self) -> Option<&GadgetFrame> {
        self.layout.as_ref()
    }

    /// Elementary writes performed while materializing the layout.
    pub fn construction_writes(&self) -> usize {
        self.writes
    }

    /// Substitutes the assignment into `N`.
    pub fn instantiate(&self, a: &Assignment<F>) -> Result<DenseMatrix<F>> {
        self.instantiate_values(a.values())
    }

    pub fn instantiate_values(&self, values: &[DenseMatrix<F>]) -> Result<DenseMatrix<F>> {
        if values.len() != self.placements.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} inputs",
                values.len(),
                self.placements.len()
            )));
        }
        let mut n = DenseMatrix::zeros(self.size, self.size);
        for (i, j, v) in &self.constants {
            n[(*i, *j)] = v.clone();
        }
        for (k, places) in self.placements.iter().enumerate() {
            let value = &values[k];
            for p in places {
                if value.dims() != (p.rows, p.cols) {
                    return Err(Error::dim("instantiate", (p.rows, p.cols), value.dims()));
                }
                for i in 0..p.rows {
                    for j in 0..p.cols {
                        let v = value[(i, j)].clone();
                        n[(p.row + i, p.col + j)] = match p.sign {
                            Sign::Plus => v,
                            Sign::Minus => -v,
                        };
                    }
                }
            }
        }
        Ok(n)
    }

    /// Text report with 1-based indices.
    pub fn report(&self, formula: &Formula<F>) -> String {
        let one_based = |v: &[usize]| {
            v.iter()
                .map(|i| (i + 1).to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut s = String::new();
        let _ = writeln!(s, "size {}", self.size);
        let _ = writeln!(s, "I [{}]", one_based(&self.out_rows));
        let _ = writeln!(s, "J [{}]", one_based(&self.out_cols));
        let _ = writeln!(s, "constants {}", self.constants.len());
        for (i, j, v) in &self.constants {
            let _ = writeln!(s, "  ({},{}) {}", i + 1, j + 1, v);
        }
        for (k, places) in self.placements.iter().enumerate() {
            let name = &formula.inputs()[k].name;
            for p in places {
                let sign = if p.sign == Sign::Plus { '+' } else { '-' };
                let _ = writeln!(
                    s,
                    "input {name} at ({},{}) {}x{} sign {sign}",
                    p.row + 1,
                    p.col + 1,
                    p.rows,
                    p.cols
                );
            }
        }
        s
    }

    /// Block layout as a Graphviz digraph.
    pub fn to_dot(&self, formula: &Formula<F>) -> String {
        let mut s = String::from("digraph layout {\n  node [shape=box];\n");
        let mut next = 0usize;
        if let Some(layout) = &self.layout {
            dot_frame(layout, 0, formula, &mut s, &mut next);
        }
        s.push_str("}\n");
        s
    }
}

fn dot_frame<F: Field>(
    frame: &GadgetFrame,
    offset: usize,
    formula: &Formula<F>,
    out: &mut String,
    next: &mut usize,
) -> usize {
    let id = *next;
    *next += 1;
    let what = match (frame.kind, &formula.node(frame.node).kind) {
        (FrameKind::Leaf, NodeKind::Input(k)) => format!("input {}", formula.inputs()[*k].name),
        (FrameKind::Leaf, _) => "const".to_string(),
        (kind, _) => format!("{kind:?}").to_lowercase(),
    };
    let _ = writeln!(
        out,
        "  f{id} [label=\"{what}\\n[{}..{}]\"];",
        offset + 1,
        offset + frame.size
    );
    for (child_offset, child) in &frame.children {
        let c = dot_frame(child, offset + child_offset, formula, out, next);
        let _ = writeln!(out, "  f{id} -> f{c};");
    }
    id
}

/// Builds the gadget layout for `f`.
pub fn compile<F: Field>(f: &Formula<F>) -> CompiledFormula<F> {
    let layout = build_frame(f, f.root());
    let mut c = CompiledFormula {
        size: layout.size,
        constants: Vec::new(),
        placements: vec![Vec::new(); f.inputs().len()],
        out_rows: layout.out_rows.clone(),
        out_cols: layout.out_cols.clone(),
        layout: None,
        writes: 0,
    };
    materialize(f, &layout, 0, &mut c);
    c.writes = c.constants.len() + c.all_placements().map(|p| p.rows * p.cols).sum::<usize>();
    c.layout = Some(layout);
    c
}

fn build_frame<F: Field>(f: &Formula<F>, id: NodeId) -> GadgetFrame {
    let node = f.node(id);
    let (n, m) = node.dims();
    match node.kind {
        NodeKind::Constant(_) | NodeKind::Input(_) => GadgetFrame {
            kind: FrameKind::Leaf,
            node: id,
            size: n + m,
            out_rows: (0..n).collect(),
            out_cols: (n..n + m).collect(),
            children: vec![],
        },
        NodeKind::Inv => {
            let child = build_frame(f, node.children[0]);
            let s = child.size;
            GadgetFrame {
                kind: FrameKind::Inv,
                node: id,
                size: s + n,
                out_rows: (s..s + n).collect(),
                out_cols: (s..s + n).collect(),
                children: vec![(0, child)],
            }
        }
        NodeKind::Add | NodeKind::Sub => {
            let l = build_frame(f, node.children[0]);
            let r = build_frame(f, node.children[1]);
            let (nl, nr) = (l.size, r.size);
            let mid = nl + nr;
            let bottom = mid + m;
            GadgetFrame {
                kind: if node.kind == NodeKind::Add {
                    FrameKind::Add
                } else {
                    FrameKind::Sub
                },
                node: id,
                size: bottom + n,
                out_rows: (bottom..bottom + n).collect(),
                out_cols: (mid..mid + m).collect(),
                children: vec![(0, l), (nl, r)],
            }
        }
        NodeKind::Mul => {
            let l = build_frame(f, node.children[0]);
            let r = build_frame(f, node.children[1]);
            let nl = l.size;
            GadgetFrame {
                kind: FrameKind::Mul,
                node: id,
                size: nl + r.size,
                out_rows: l.out_rows.clone(),
                out_cols: r.out_cols.iter().map(|j| j + nl).collect(),
                children: vec![(0, l), (nl, r)],
            }
        }
    }
}

fn materialize<F: Field>(f: &Formula<F>, frame: &GadgetFrame, at: usize, c: &mut CompiledFormula<F>) {
    let one = F::one();
    let minus_one = -F::one();
    let mut put = |i: usize, j: usize, v: &F| c.constants.push((at + i, at + j, v.clone()));
    match frame.kind {
        FrameKind::Leaf => {
            let node = f.node(frame.node);
            let (n, m) = node.dims();
            for t in 0..n {
                put(t, t, &one);
            }
            for t in 0..m {
                put(n + t, n + t, &minus_one);
            }
            match &node.kind {
                NodeKind::Constant(value) => {
                    for i in 0..n {
                        for j in 0..m {
                            if !value[(i, j)].is_zero() {
                                put(i, n + j, &value[(i, j)]);
                            }
                        }
                    }
                }
                NodeKind::Input(k) => c.placements[*k].push(Placement {
                    input: *k,
                    node: frame.node,
                    row: at,
                    col: at + n,
                    rows: n,
                    cols: m,
                    sign: Sign::Plus,
                }),
                _ => unreachable!("leaf frame on a gate"),
            }
        }
        FrameKind::Inv => {
            let child = &frame.children[0].1;
            let s = child.size;
            for (t, &j) in child.out_cols.iter().enumerate() {
                put(j, s + t, &minus_one);
            }
            for (t, &i) in child.out_rows.iter().enumerate() {
                put(s + t, i, &one);
            }
        }
        FrameKind::Add | FrameKind::Sub => {
            let (l, r) = (&frame.children[0].1, &frame.children[1].1);
            let nl = l.size;
            let mid = nl + r.size;
            let m = frame.out_cols.len();
            let bottom = mid + m;
            let r_sign = if frame.kind == FrameKind::Add { &one } else { &minus_one };
            for (t, &j) in l.out_cols.iter().enumerate() {
                put(j, mid + t, &one);
            }
            for (t, &j) in r.out_cols.iter().enumerate() {
                put(nl + j, mid + t, r_sign);
            }
            for t in 0..m {
                put(mid + t, mid + t, &minus_one);
            }
            for (t, &i) in l.out_rows.iter().enumerate() {
                put(bottom + t, i, &one);
            }
            for (t, &i) in r.out_rows.iter().enumerate() {
                put(bottom + t, nl + i, &one);
            }
            for t in 0..frame.out_rows.len() {
                put(bottom + t, bottom + t, &minus_one);
            }
        }
        FrameKind::Mul => {
            let (l, r) = (&frame.children[0].1, &frame.children[1].1);
            let nl = l.size;
            // -I[:, J_L] * I[I_R, :] has a -1 at (J_L[t], I_R[t])
            for (&j, &i) in l.out_cols.iter().zip(&r.out_rows) {
                put(j, nl + i, &minus_one);
            }
        }
    }
    for (offset, child) in &frame.children {
        materialize(f, child, at + offset, c);
    }
}

/// Inverse of the block matrix `[[A, B], [C, D]]` via the Schur complement
/// `S = D - C A^-1 B`:
///
/// ```text
/// [ A^-1 + A^-1 B S^-1 C A^-1   -A^-1 B S^-1 ]
/// [ -S^-1 C A^-1                 S^-1        ]
/// ```
pub fn block_inverse<F: Field>(
    a: &DenseMatrix<F>,
    b: &DenseMatrix<F>,
    c: &DenseMatrix<F>,
    d: &DenseMatrix<F>,
) -> Result<DenseMatrix<F>> {
    let (n, m) = (a.rows(), d.rows());
    if !a.is_square() || !d.is_square() {
        return Err(Error::dim("block_inverse", a.dims(), d.dims()));
    }
    if b.dims() != (n, m) {
        return Err(Error::dim("block_inverse", (n, m), b.dims()));
    }
    if c.dims() != (m, n) {
        return Err(Error::dim("block_inverse", (m, n), c.dims()));
    }
    let a_inv = a.invert()?;
    let a_inv_b = a_inv.multiply(b)?;
    let c_a_inv = c.multiply(&a_inv)?;
    let schur = d.sub(&c.multiply(&a_inv_b)?)?;
    let s_inv = schur.invert()?;
    let top_right = a_inv_b.multiply(&s_inv)?.neg();
    let bottom_left = s_inv.multiply(&c_a_inv)?.neg();
    let top_left = a_inv.sub(&top_right.multiply(&c_a_inv)?)?;
    let mut out = DenseMatrix::zeros(n + m, n + m);
    out.set_block(0, 0, &top_left);
    out.set_block(0, n, &top_right);
    out.set_block(n, 0, &bottom_left);
    out.set_block(n, n, &s_inv);
    Ok(out)
}

/// `[[A, B], [C, D]]`.
pub fn block_matrix<F: Field>(
    a: &DenseMatrix<F>,
    b: &DenseMatrix<F>,
    c: &DenseMatrix<F>,
    d: &DenseMatrix<F>,
) -> DenseMatrix<F> {
    let (n, m) = (a.rows(), d.rows());
    let mut g = DenseMatrix::zeros(n + m, n + m);
    g.set_block(0, 0, a);
    g.set_block(0, n, b);
    g.set_block(n, 0, c);
    g.set_block(n, n, d);
    g
}
