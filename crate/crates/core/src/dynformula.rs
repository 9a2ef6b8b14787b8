//! Dynamic formulas.
//!
//! A [`DynamicFormula`] compiles a formula once, instantiates `N` on the
//! initial assignment and keeps a dynamic inverse of `N`. Input changes are
//! translated into sparse changes of `N` through the compiled placements.
//! Changes since the last reset are accumulated and handed to the backend as
//! one merged delta, so each `apply` replaces the backend's delta with the
//! union of everything that happened since the last reset.
//!
//! `N` can stay invertible when the formula is not executable, e.g. for
//! `inv(inv(M))` with singular `M`. Gadget determinants multiply over
//! children, and an inversion gadget contributes `det` of its argument, so
//! the formula is executable iff the principal block of every inversion
//! gadget is invertible. Each such block below the root gets its own
//! dynamic inverse, used only to reject updates.

use std::collections::{BTreeMap, BTreeSet};

use crate::compiler::{compile, CompiledFormula, FrameKind, GadgetFrame, Sign};
use crate::dyninv::{InverseBackend, ResetPolicy, SmwInverse};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::formula::{Assignment, Formula};
use crate::matrix::{DenseMatrix, SparseDelta};

/// Shape of one input change.
#[derive(Clone, Debug, PartialEq)]
pub enum Change<F> {
    Entry { i: usize, j: usize, value: F },
    Column { j: usize, values: Vec<F> },
    Row { i: usize, values: Vec<F> },
    Batch(Vec<(usize, usize, F)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateEvent<F> {
    pub input: usize,
    pub change: Change<F>,
}

impl<F: Field> UpdateEvent<F> {
    pub fn entry(input: usize, i: usize, j: usize, value: F) -> Self {
        UpdateEvent {
            input,
            change: Change::Entry { i, j, value },
        }
    }

    pub fn column(input: usize, j: usize, values: Vec<F>) -> Self {
        UpdateEvent {
            input,
            change: Change::Column { j, values },
        }
    }

    pub fn row(input: usize, i: usize, values: Vec<F>) -> Self {
        UpdateEvent {
            input,
            change: Change::Row { i, values },
        }
    }

    pub fn batch(input: usize, entries: Vec<(usize, usize, F)>) -> Self {
        UpdateEvent {
            input,
            change: Change::Batch(entries),
        }
    }

    /// The `(i, j, value)` writes of this event, in order.
    pub fn writes(&self) -> Vec<(usize, usize, F)> {
        match &self.change {
            Change::Entry { i, j, value } => vec![(*i, *j, value.clone())],
            Change::Column { j, values } => values
                .iter()
                .enumerate()
                .map(|(i, v)| (i, *j, v.clone()))
                .collect(),
            Change::Row { i, values } => values
                .iter()
                .enumerate()
                .map(|(j, v)| (*i, j, v.clone()))
                .collect(),
            Change::Batch(list) => list.clone(),
        }
    }

    fn validate(&self, formula: &Formula<F>) -> Result<()> {
        let decl = formula
            .inputs()
            .get(self.input)
            .ok_or_else(|| Error::InvalidInput(format!("no input with index {}", self.input)))?;
        let (r, c) = (decl.rows, decl.cols);
        match &self.change {
            Change::Column { j, values } if values.len() != r || *j >= c => {
                return Err(Error::InvalidInput(format!(
                    "column update of {} does not fit {r}x{c}",
                    decl.name
                )))
            }
            Change::Row { i, values } if values.len() != c || *i >= r => {
                return Err(Error::InvalidInput(format!(
                    "row update of {} does not fit {r}x{c}",
                    decl.name
                )))
            }
            _ => {}
        }
        for (i, j, _) in self.writes() {
            if i >= r || j >= c {
                return Err(Error::InvalidInput(format!(
                    "entry ({i},{j}) outside {} ({r}x{c})",
                    decl.name
                )));
            }
        }
        Ok(())
    }
}

/// A formula whose value is maintained under input changes.
#[derive(Clone, Debug)]
pub struct DynamicFormula<F: Field, B = SmwInverse<F>> {
    formula: Formula<F>,
    compiled: CompiledFormula<F>,
    backend: B,
    current: Assignment<F>,
    /// assignment `N` was last reset to
    base: Assignment<F>,
    /// input cells changed since the last reset, with their new values
    pending: BTreeMap<(usize, usize, usize), F>,
    policy: ResetPolicy,
    iteration: usize,
    resets: Vec<usize>,
    guards: Vec<Guard<B>>,
}

/// Dynamic inverse of the principal block `offset..offset + size` of `N`.
#[derive(Clone, Debug)]
struct Guard<B> {
    offset: usize,
    size: usize,
    backend: B,
}

/// `(offset, size)` of every inversion gadget except one spanning all of `N`.
fn inversion_blocks(frame: &GadgetFrame, at: usize, total: usize, out: &mut Vec<(usize, usize)>) {
    if frame.kind == FrameKind::Inv && frame.size < total {
        out.push((at, frame.size));
    }
    for (offset, child) in &frame.children {
        inversion_blocks(child, at + offset, total, out);
    }
}

fn restrict<F: Field>(delta: &SparseDelta<F>, offset: usize, size: usize) -> SparseDelta<F> {
    let inside = |x: usize| x >= offset && x < offset + size;
    let mut out = SparseDelta::new(size, size);
    for (i, j, v) in delta.iter() {
        if inside(i) && inside(j) {
            out.set(i - offset, j - offset, v.clone());
        }
    }
    out
}

impl<F: Field> DynamicFormula<F, SmwInverse<F>> {
    /// Compiles `f` and preprocesses `N` on `a`. Fails with `Singular` when
    /// `f` is not executable on `a`.
    pub fn open(f: &Formula<F>, a: &Assignment<F>, policy: ResetPolicy) -> Result<Self> {
        Self::open_with_backend(f, a, policy, SmwInverse::preprocess)
    }
}

impl<F: Field, B: InverseBackend<F>> DynamicFormula<F, B> {
    pub fn open_with_backend(
        f: &Formula<F>,
        a: &Assignment<F>,
        policy: ResetPolicy,
        make: impl Fn(DenseMatrix<F>) -> Result<B>,
    ) -> Result<Self> {
        if a.values().len() != f.inputs().len() {
            return Err(Error::InvalidInput("assignment does not match formula".into()));
        }
        let compiled = compile(f);
        let n = compiled.instantiate(a)?;
        let mut blocks = Vec::new();
        if let Some(layout) = compiled.layout() {
            inversion_blocks(layout, 0, compiled.size(), &mut blocks);
        }
        let guards = blocks
            .into_iter()
            .map(|(offset, size)| {
                Ok(Guard {
                    offset,
                    size,
                    backend: make(n.block(offset, offset, size, size))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let backend = make(n)?;
        Ok(DynamicFormula {
            formula: f.clone(),
            compiled,
            backend,
            current: a.clone(),
            base: a.clone(),
            pending: BTreeMap::new(),
            policy,
            iteration: 0,
            resets: Vec::new(),
            guards,
        })
    }

    pub fn formula(&self) -> &Formula<F> {
        &self.formula
    }

    pub fn compiled(&self) -> &CompiledFormula<F> {
        &self.compiled
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn assignment(&self) -> &Assignment<F> {
        &self.current
    }

    pub fn policy(&self) -> ResetPolicy {
        self.policy
    }

    pub fn output_dims(&self) -> (usize, usize) {
        self.formula.output_dims()
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.formula.input_index(name)
    }

    /// Number of successful `apply` calls.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Iterations after which a reset happened.
    pub fn reset_iterations(&self) -> &[usize] {
        &self.resets
    }

    /// Inversion gadgets below the root whose blocks are tracked to detect
    /// non-executable assignments.
    pub fn guard_count(&self) -> usize {
        self.guards.len()
    }

    /// Input cells changed since the last reset.
    pub fn pending_entries(&self) -> usize {
        self.pending.len()
    }

    /// The `N` cells an event writes, in placement order.
    pub fn cells_touched(&self, event: &UpdateEvent<F>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, j, _) in event.writes() {
            for p in self.compiled.placements(event.input) {
                out.push((p.row + i, p.col + j));
            }
        }
        out
    }

    /// Applies `events` in order as one transaction.
    ///
    /// Fails with `Singular` if the resulting assignment is not executable;
    /// the structure then still reflects the previous assignment.
    pub fn apply(&mut self, events: &[UpdateEvent<F>]) -> Result<()> {
        for e in events {
            e.validate(&self.formula)?;
        }
        let mut pending = self.pending.clone();
        for e in events {
            for (i, j, v) in e.writes() {
                pending.insert((e.input, i, j), v);
            }
        }
        let delta = self.n_delta(&pending);
        self.update_backends(delta)?;
        for e in events {
            for (i, j, v) in e.writes() {
                self.current.value_mut(e.input)[(i, j)] = v;
            }
        }
        self.pending = pending;
        self.iteration += 1;
        let d = self.backend.delta();
        let (entries, columns) = (d.nnz(), d.touched_columns().len());
        if self.policy.fires(self.compiled.size(), entries, columns) {
            self.reset();
        }
        Ok(())
    }

    /// Folds the accumulated changes into the base of the backend.
    pub fn commit(&mut self) {
        self.reset();
    }

    /// Hands `delta` to the main backend and its restrictions to the guards,
    /// restoring every previous delta if any of them is singular.
    fn update_backends(&mut self, delta: SparseDelta<F>) -> Result<()> {
        let restricted: Vec<SparseDelta<F>> = self
            .guards
            .iter()
            .map(|g| restrict(&delta, g.offset, g.size))
            .collect();
        let previous = self.backend.delta().clone();
        self.backend.update(delta)?;
        let mut replaced = Vec::new();
        for (t, d) in restricted.into_iter().enumerate() {
            let g = &mut self.guards[t];
            if *g.backend.delta() == d {
                continue;
            }
            let before = g.backend.delta().clone();
            if let Err(e) = g.backend.update(d) {
                for (u, old) in replaced {
                    let g: &mut Guard<B> = &mut self.guards[u];
                    g.backend.update(old).expect("previous delta was accepted");
                }
                self.backend.update(previous).expect("previous delta was accepted");
                return Err(e);
            }
            replaced.push((t, before));
        }
        Ok(())
    }

    fn reset(&mut self) {
        for g in &mut self.guards {
            g.backend.reset();
        }
        self.backend.reset();
        self.base = self.current.clone();
        self.pending.clear();
        self.resets.push(self.iteration);
    }

    fn n_delta(&self, pending: &BTreeMap<(usize, usize, usize), F>) -> SparseDelta<F> {
        let size = self.compiled.size();
        let mut delta = SparseDelta::new(size, size);
        for (&(k, i, j), v) in pending {
            let diff = v.clone() - self.base.value(k)[(i, j)].clone();
            if diff.is_zero() {
                continue;
            }
            for p in self.compiled.placements(k) {
                let d = match p.sign {
                    Sign::Plus => diff.clone(),
                    Sign::Minus => -diff.clone(),
                };
                delta.set(p.row + i, p.col + j, d);
            }
        }
        delta
    }

    pub fn get_entry(&self, r: usize, c: usize) -> F {
        let i = self.compiled.output_rows()[r];
        let j = self.compiled.output_cols()[c];
        self.backend.query_column(&[i], j).remove(0)
    }

    pub fn get_row(&self, r: usize) -> Vec<F> {
        let i = self.compiled.output_rows()[r];
        self.backend.query_row(i, self.compiled.output_cols())
    }

    pub fn get_column(&self, c: usize) -> Vec<F> {
        let j = self.compiled.output_cols()[c];
        self.backend.query_column(self.compiled.output_rows(), j)
    }

    /// The whole output, read column by column.
    pub fn value(&self) -> DenseMatrix<F> {
        let (r, c) = self.output_dims();
        let cols: Vec<Vec<F>> = (0..c).map(|j| self.get_column(j)).collect();
        DenseMatrix::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    /// Distinct input cells written by `events`, per input.
    pub fn distinct_cells(events: &[UpdateEvent<F>]) -> BTreeSet<(usize, usize, usize)> {
        events
            .iter()
            .flat_map(|e| e.writes().into_iter().map(move |(i, j, _)| (e.input, i, j)))
            .collect()
    }
}
