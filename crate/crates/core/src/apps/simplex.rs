//! Simplex method on a dynamically maintained tableau.
//!
//! For a basis `B` and nonbasis `N`, with selector inputs `SB` (`n x d`,
//! column `t` is `e_{B[t]}`) and `SN` (`n x (n-d)`), the tableau is
//!
//! ```text
//! Abar = inv(A*SB)*A*SN
//! bbar = inv(A*SB)*b
//! cbar = c*SN - c*SB*inv(A*SB)*A*SN
//! fbar = c*SB*inv(A*SB)*b
//! ```
//!
//! each kept as its own dynamic formula. A pivot swaps one unit vector
//! between the selectors, which is two entry changes per selector.
//! Entering variables follow Bland's rule; ratio-test ties go to the
//! smallest basic variable index.

use std::collections::BTreeSet;

use crate::dyninv::ResetPolicy;
use crate::dynformula::{DynamicFormula, UpdateEvent};
use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::formula::{Assignment, Formula};
use crate::matrix::DenseMatrix;

use super::lp::LinearProgram;

type Dyn = DynamicFormula<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub enum SimplexOutcome {
    Optimal {
        x: Vec<Rational>,
        objective: Rational,
        basis: Vec<usize>,
        /// `(entering, leaving)` variable pairs
        pivots: Vec<(usize, usize)>,
    },
    Unbounded {
        /// `A d = 0`, `d >= 0` and `c^T d > 0`
        direction: Vec<Rational>,
        pivots: Vec<(usize, usize)>,
    },
}

/// Result of one Bland step.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Optimal,
    Unbounded(Vec<Rational>),
    Pivoted { entering: usize, leaving: usize },
}

pub struct SimplexState {
    lp: LinearProgram,
    basis: Vec<usize>,
    nonbasis: Vec<usize>,
    /// `None` when every variable is basic
    abar: Option<Dyn>,
    bbar: Dyn,
    cbar: Option<Dyn>,
    fbar: Dyn,
    pivots: Vec<(usize, usize)>,
}

fn selector(n: usize, idx: &[usize]) -> DenseMatrix<Rational> {
    DenseMatrix::from_fn(n, idx.len(), |i, t| Rational::from_i64((idx[t] == i) as i64))
}

impl SimplexState {
    /// Opens the tableau at `basis` (ordered, `d` distinct indices). Fails
    /// with `SingularBasis` when `A_B` is singular.
    pub fn open(lp: &LinearProgram, basis: &[usize], policy: ResetPolicy) -> Result<Self> {
        let (d, n) = lp.a.dims();
        let distinct: BTreeSet<usize> = basis.iter().copied().collect();
        if basis.len() != d || distinct.len() != d || basis.iter().any(|&j| j >= n) {
            return Err(Error::InvalidInput(format!(
                "basis must list {d} distinct variables below {n}"
            )));
        }
        let nonbasis: Vec<usize> = (0..n).filter(|j| !distinct.contains(j)).collect();
        let m = n - d;
        let sb = selector(n, basis);
        let sn = selector(n, &nonbasis);
        let b = DenseMatrix::column_vector(lp.b.clone());
        let c = DenseMatrix::from_rows(vec![lp.c.clone()])?;
        let open = |text: String, values: Vec<DenseMatrix<Rational>>| -> Result<Dyn> {
            let f = Formula::parse(&text)?;
            let a = Assignment::new(&f, values)?;
            DynamicFormula::open(&f, &a, policy).map_err(|e| match e {
                Error::Singular => Error::SingularBasis,
                e => e,
            })
        };
        let a = lp.a.clone();
        let bbar = open(
            format!("input A:{d}x{n}; input SB:{n}x{d}; input b:{d}x1; out inv(A*SB)*b"),
            vec![a.clone(), sb.clone(), b.clone()],
        )?;
        let fbar = open(
            format!("input A:{d}x{n}; input SB:{n}x{d}; input b:{d}x1; input c:1x{n}; out c*SB*inv(A*SB)*b"),
            vec![a.clone(), sb.clone(), b, c.clone()],
        )?;
        let (abar, cbar) = if m == 0 {
            (None, None)
        } else {
            let abar = open(
                format!("input A:{d}x{n}; input SB:{n}x{d}; input SN:{n}x{m}; out inv(A*SB)*A*SN"),
                vec![a.clone(), sb.clone(), sn.clone()],
            )?;
            let cbar = open(
                format!(
                    "input A:{d}x{n}; input SB:{n}x{d}; input SN:{n}x{m}; input c:1x{n}; \
                     out c*SN - c*SB*inv(A*SB)*A*SN"
                ),
                vec![a, sb, sn, c],
            )?;
            (Some(abar), Some(cbar))
        };
        Ok(SimplexState {
            lp: lp.clone(),
            basis: basis.to_vec(),
            nonbasis,
            abar,
            bbar,
            cbar,
            fbar,
            pivots: Vec::new(),
        })
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn nonbasis(&self) -> &[usize] {
        &self.nonbasis
    }

    pub fn pivots(&self) -> &[(usize, usize)] {
        &self.pivots
    }

    /// `cbar`, indexed like [`nonbasis`](Self::nonbasis).
    pub fn reduced_costs(&self) -> Vec<Rational> {
        self.cbar.as_ref().map(|f| f.get_row(0)).unwrap_or_default()
    }

    /// `bbar`, indexed like [`basis`](Self::basis).
    pub fn basic_values(&self) -> Vec<Rational> {
        self.bbar.get_column(0)
    }

    pub fn objective(&self) -> Rational {
        self.fbar.get_entry(0, 0)
    }

    /// Column `p` of `Abar`, i.e. `A_B^-1 A_{N[p]}`.
    pub fn column(&self, p: usize) -> Vec<Rational> {
        self.abar.as_ref().expect("nonbasic column").get_column(p)
    }

    pub fn tableau(&self) -> Option<DenseMatrix<Rational>> {
        self.abar.as_ref().map(|f| f.value())
    }

    /// The basic solution of the current basis.
    pub fn point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.lp.variables()];
        for (t, v) in self.basic_values().into_iter().enumerate() {
            x[self.basis[t]] = v;
        }
        x
    }

    /// Exchanges `nonbasis[p]` with `basis[r]`.
    pub fn pivot(&mut self, p: usize, r: usize) -> Result<()> {
        let entering = self.nonbasis[p];
        let leaving = self.basis[r];
        let one = Rational::one;
        let zero = Rational::zero;
        let mut formulas: Vec<&mut Dyn> = vec![&mut self.bbar, &mut self.fbar];
        formulas.extend(self.abar.as_mut());
        formulas.extend(self.cbar.as_mut());
        // all four see the same assignment, so they succeed or fail together
        for f in formulas {
            let mut events = Vec::new();
            if let Some(sb) = f.input_index("SB") {
                events.push(UpdateEvent::entry(sb, leaving, r, zero()));
                events.push(UpdateEvent::entry(sb, entering, r, one()));
            }
            if let Some(sn) = f.input_index("SN") {
                events.push(UpdateEvent::entry(sn, entering, p, zero()));
                events.push(UpdateEvent::entry(sn, leaving, p, one()));
            }
            f.apply(&events).map_err(|e| match e {
                Error::Singular => Error::SingularBasis,
                e => e,
            })?;
        }
        self.basis[r] = entering;
        self.nonbasis[p] = leaving;
        self.pivots.push((entering, leaving));
        Ok(())
    }

    /// One iteration of Bland's rule.
    pub fn step(&mut self) -> Result<Step> {
        let cbar = self.reduced_costs();
        let entering = (0..cbar.len())
            .filter(|&p| cbar[p] > Rational::zero())
            .min_by_key(|&p| self.nonbasis[p]);
        let Some(p) = entering else {
            return Ok(Step::Optimal);
        };
        let col = self.column(p);
        let bbar = self.basic_values();
        let mut best: Option<(Rational, usize)> = None;
        for (r, a) in col.iter().enumerate() {
            if *a <= Rational::zero() {
                continue;
            }
            let ratio = bbar[r].clone() / a.clone();
            let better = match &best {
                None => true,
                Some((q, br)) => ratio < *q || (ratio == *q && self.basis[r] < self.basis[*br]),
            };
            if better {
                best = Some((ratio, r));
            }
        }
        let Some((_, r)) = best else {
            let mut dir = vec![Rational::zero(); self.lp.variables()];
            dir[self.nonbasis[p]] = Rational::one();
            for (r, a) in col.into_iter().enumerate() {
                dir[self.basis[r]] = -a;
            }
            return Ok(Step::Unbounded(dir));
        };
        let (entering, leaving) = (self.nonbasis[p], self.basis[r]);
        self.pivot(p, r)?;
        Ok(Step::Pivoted { entering, leaving })
    }
}

/// Solves `lp` from a feasible `basis`.
pub fn simplex_solve(lp: &LinearProgram, basis: &[usize], policy: ResetPolicy) -> Result<SimplexOutcome> {
    let mut st = SimplexState::open(lp, basis, policy)?;
    if let Some(r) = st.basic_values().iter().position(|v| *v < Rational::zero()) {
        return Err(Error::InfeasibleBasis(st.basis[r]));
    }
    loop {
        match st.step()? {
            Step::Pivoted { .. } => {}
            Step::Optimal => {
                return Ok(SimplexOutcome::Optimal {
                    x: st.point(),
                    objective: st.objective(),
                    basis: st.basis.clone(),
                    pivots: st.pivots.clone(),
                })
            }
            Step::Unbounded(direction) => {
                return Ok(SimplexOutcome::Unbounded {
                    direction,
                    pivots: st.pivots.clone(),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasicSolution {
    pub x: Vec<Rational>,
    /// a basis containing the support of `x`
    pub basis: Vec<usize>,
    pub pivots: usize,
    /// moves along kernel directions
    pub moves: usize,
}

/// Turns a feasible `x` into a basic feasible solution with no smaller
/// objective value.
pub fn basic_solution(lp: &LinearProgram, x: &[Rational], policy: ResetPolicy) -> Result<BasicSolution> {
    let (d, n) = lp.a.dims();
    if x.len() != n {
        return Err(Error::InfeasiblePoint(format!("point has {} entries, expected {n}", x.len())));
    }
    if let Some(j) = x.iter().position(|v| *v < Rational::zero()) {
        return Err(Error::InfeasiblePoint(format!("x[{}] is negative", j + 1)));
    }
    if !lp.is_feasible(x) {
        return Err(Error::InfeasiblePoint("A x differs from b".into()));
    }
    let mut x = x.to_vec();
    let positive = |x: &[Rational], j: usize| x[j] > Rational::zero();

    // support columns first, then fill up to a basis
    let mut basis: Vec<usize> = Vec::new();
    let order = (0..n).filter(|&j| positive(&x, j)).chain((0..n).filter(|&j| !positive(&x, j)));
    for j in order {
        if basis.len() == d {
            break;
        }
        let mut cols = basis.clone();
        cols.push(j);
        let rows: Vec<usize> = (0..d).collect();
        if lp.a.select(&rows, &cols).rank() == cols.len() {
            basis = cols;
        }
    }
    let mut st = SimplexState::open(lp, &basis, policy)?;
    let mut moves = 0;
    loop {
        let outside = (0..st.nonbasis.len()).find(|&p| positive(&x, st.nonbasis[p]));
        let Some(p) = outside else { break };
        let j = st.nonbasis[p];
        let col = st.column(p);
        let swap = (0..d).find(|&r| !col[r].is_zero() && !positive(&x, st.basis[r]));
        if let Some(r) = swap {
            st.pivot(p, r)?;
            continue;
        }
        // A_j = sum_r col[r] A_{B[r]} with every such B[r] in the support
        let mut z = vec![Rational::zero(); n];
        z[j] = Rational::one();
        for (r, a) in col.iter().enumerate() {
            z[st.basis[r]] = -a.clone();
        }
        let cz = lp.objective(&z);
        let has_negative = z.iter().any(|v| *v < Rational::zero());
        if !(cz >= Rational::zero() && has_negative) {
            for v in z.iter_mut() {
                *v = -v.clone();
            }
        }
        let step = (0..n)
            .filter(|&i| z[i] < Rational::zero())
            .map(|i| x[i].clone() / -z[i].clone())
            .min()
            .expect("direction has a negative entry");
        for i in 0..n {
            x[i] = x[i].clone() + step.clone() * z[i].clone();
        }
        moves += 1;
    }
    Ok(BasicSolution {
        x,
        basis: st.basis.clone(),
        pivots: st.pivots.len(),
        moves,
    })
}
