//! Interior point projection maintenance.
//!
//! Maintains `D*At*inv(A*D*D*At)*A*D*h` for a fixed `A` (`d x n`) while the
//! diagonal `D` and the vector `h` change. An iteration changes `2^j`
//! entries, and batches of size `2^j` are at least `ceil(2^(j/2))`
//! iterations apart. Changes since the last reset form the set `U`; once
//! `|U|` reaches the policy threshold the accumulated changes are folded
//! into the base matrix.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dyninv::{ResetMode, ResetPolicy};
use crate::dynformula::{DynamicFormula, UpdateEvent};
use crate::error::{Error, Result};
use crate::field::{modulus, Field, Zp};
use crate::formula::{Assignment, Formula};
use crate::matrix::DenseMatrix;
use crate::ops::{self, OpCount};

pub fn formula_text(n: usize, d: usize) -> String {
    format!(
        "input D:{n}x{n}; input At:{n}x{d}; input A:{d}x{n}; input h:{n}x1; \
         out D*At*inv(A*D*D*At)*A*D*h"
    )
}

/// Entry of `D` (diagonal position) or of `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Target {
    D(usize),
    H(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport {
    pub iteration: usize,
    /// entries changed in this iteration
    pub changed: usize,
    /// `|U|` after this iteration's changes
    pub accumulated: usize,
    /// distinct `D` columns in `U`
    pub accumulated_columns: usize,
    pub reset: bool,
    pub update: OpCount,
    pub query: OpCount,
    pub reset_ops: OpCount,
    pub mismatch: bool,
}

pub struct IpmSimulator {
    n: usize,
    df: DynamicFormula<Zp>,
    policy: ResetPolicy,
    d_in: usize,
    h_in: usize,
    touched: BTreeSet<Target>,
    iteration: usize,
}

impl IpmSimulator {
    pub fn new(a: &DenseMatrix<Zp>, diag: &[Zp], h: &[Zp], policy: ResetPolicy) -> Result<Self> {
        let (d, n) = a.dims();
        if diag.len() != n || h.len() != n {
            return Err(Error::InvalidInput(format!("D and h must have {n} entries")));
        }
        let f = Formula::parse(&formula_text(n, d))?;
        let dm = DenseMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { Zp::zero() });
        let asg = Assignment::new(
            &f,
            vec![dm, a.transpose(), a.clone(), DenseMatrix::column_vector(h.to_vec())],
        )?;
        // resets are driven by the set U below
        let df = DynamicFormula::open(&f, &asg, ResetPolicy::never())?;
        Ok(IpmSimulator {
            n,
            d_in: df.input_index("D").expect("D"),
            h_in: df.input_index("h").expect("h"),
            df,
            policy,
            touched: BTreeSet::new(),
            iteration: 0,
        })
    }

    pub fn dynamic(&self) -> &DynamicFormula<Zp> {
        &self.df
    }

    pub fn output(&self) -> Vec<Zp> {
        self.df.get_column(0)
    }

    /// Static evaluation on the current values.
    pub fn oracle(&self) -> Result<Vec<Zp>> {
        Ok(self.df.formula().evaluate(self.df.assignment())?.column(0))
    }

    pub fn value(&self, t: Target) -> Zp {
        match t {
            Target::D(i) => self.df.assignment().value(self.d_in)[(i, i)],
            Target::H(i) => self.df.assignment().value(self.h_in)[(i, 0)],
        }
    }

    fn events(&self, changes: &[(Target, Zp)]) -> Vec<UpdateEvent<Zp>> {
        changes
            .iter()
            .map(|&(t, v)| match t {
                Target::D(i) => UpdateEvent::entry(self.d_in, i, i, v),
                Target::H(i) => UpdateEvent::entry(self.h_in, i, 0, v),
            })
            .collect()
    }

    /// Applies one iteration's changes, resets if `U` is large enough and
    /// reads the whole output. `h` entries count towards `U` only when
    /// `count_h` is set.
    pub fn step(&mut self, changes: &[(Target, Zp)], count_h: bool) -> Result<IterationReport> {
        let events = self.events(changes);
        let ((), update) = {
            let (r, c) = ops::measure(|| self.df.apply(&events));
            (r?, c)
        };
        self.iteration += 1;
        for &(t, _) in changes {
            if count_h || matches!(t, Target::D(_)) {
                self.touched.insert(t);
            }
        }
        let accumulated = self.touched.len();
        let columns = self.touched.iter().filter(|t| matches!(t, Target::D(_))).count();
        let reset = self.policy.fires(self.n, accumulated, columns);
        let reset_ops = if reset {
            let ((), c) = ops::measure(|| self.df.commit());
            self.touched.clear();
            c
        } else {
            OpCount::default()
        };
        let (out, query) = ops::measure(|| self.output());
        let mismatch = out != self.oracle()?;
        Ok(IterationReport {
            iteration: self.iteration,
            changed: changes.len(),
            accumulated,
            accumulated_columns: columns,
            reset,
            update,
            query,
            reset_ops,
            mismatch,
        })
    }
}

/// Iteration of each batch size `2^j`: sizes are placed largest first, each
/// `ceil(2^(j/2))` iterations after its previous placement, deferred to the
/// next free iteration on conflict.
pub fn schedule(n: usize, iterations: usize) -> Result<Vec<Option<usize>>> {
    if iterations == 0 {
        return Err(Error::ScheduleInfeasible("no iterations requested".into()));
    }
    if n == 0 {
        return Err(Error::ScheduleInfeasible("empty problem".into()));
    }
    let mut slots: Vec<Option<usize>> = vec![None; iterations];
    let top = usize::BITS - 1 - n.leading_zeros();
    for j in (0..=top).rev() {
        let gap = (2f64.powf(j as f64 / 2.0) - 1e-9).ceil() as usize;
        let mut next = 0;
        while next < iterations {
            let Some(t) = (next..iterations).find(|&t| slots[t].is_none()) else {
                break;
            };
            slots[t] = Some(j as usize);
            next = t + gap.max(1);
        }
    }
    Ok(slots)
}

#[derive(Clone, Debug)]
pub struct IpmConfig {
    pub n: usize,
    pub iterations: usize,
    pub seed: u64,
    pub policy: ResetPolicy,
    /// fresh sparse `h` every iteration, resets counted in `D` columns
    pub dense_h: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IpmReport {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub modulus: u64,
    pub dense_h: bool,
    pub reset_mode: &'static str,
    pub reset_exponent: Option<f64>,
    pub threshold: Option<usize>,
    /// batch exponent `j` per iteration
    pub schedule: Vec<Option<usize>>,
    pub iterations: Vec<IterationReport>,
    pub resets: Vec<usize>,
    pub mismatches: usize,
    pub total: OpCount,
}

fn nonzero(rng: &mut ChaCha8Rng) -> Zp {
    Zp::new(rng.gen_range(1..modulus()))
}

fn different(rng: &mut ChaCha8Rng, old: Zp) -> Zp {
    loop {
        let v = nonzero(rng);
        if v != old {
            return v;
        }
    }
}

/// Runs the simulation described by `cfg` with `A` random over `Z_p` and
/// `d = n / 4`.
pub fn simulate(cfg: &IpmConfig) -> Result<IpmReport> {
    simulate_with(cfg, |_, _| {})
}

/// As [`simulate`], calling `observe` after every iteration.
pub fn simulate_with(
    cfg: &IpmConfig,
    mut observe: impl FnMut(&IpmSimulator, &IterationReport),
) -> Result<IpmReport> {
    let n = cfg.n;
    if n < 4 {
        return Err(Error::InvalidInput(format!("n = {n} is below 4")));
    }
    let plan = schedule(n, cfg.iterations)?;
    let d = n / 4;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sqrt_n = (n as f64).sqrt().ceil() as usize;
    let mut sim = loop {
        let a = DenseMatrix::from_fn(d, n, |_, _| Zp::new(rng.gen_range(0..modulus())));
        let diag: Vec<Zp> = (0..n).map(|_| nonzero(&mut rng)).collect();
        let h: Vec<Zp> = if cfg.dense_h {
            let mut h = vec![Zp::zero(); n];
            for i in sample(&mut rng, n, sqrt_n) {
                h[i] = nonzero(&mut rng);
            }
            h
        } else {
            (0..n).map(|_| nonzero(&mut rng)).collect()
        };
        match IpmSimulator::new(&a, &diag, &h, cfg.policy) {
            Ok(s) => break s,
            Err(Error::Singular) => continue,
            Err(e) => return Err(e),
        }
    };
    let mut iterations = Vec::new();
    let mut resets = Vec::new();
    for slot in &plan {
        let mut attempts = 0;
        let report = loop {
            let mut changes = Vec::new();
            if let Some(j) = *slot {
                let size = 1usize << j;
                let pool = if cfg.dense_h { n } else { 2 * n };
                for p in sample(&mut rng, pool, size.min(pool)) {
                    let t = if p < n { Target::D(p) } else { Target::H(p - n) };
                    changes.push((t, different(&mut rng, sim.value(t))));
                }
            }
            if cfg.dense_h {
                let old: Vec<usize> = (0..n).filter(|&i| !sim.value(Target::H(i)).is_zero()).collect();
                let fresh: BTreeSet<usize> = sample(&mut rng, n, sqrt_n).into_iter().collect();
                for i in old {
                    if !fresh.contains(&i) {
                        changes.push((Target::H(i), Zp::zero()));
                    }
                }
                for i in fresh {
                    changes.push((Target::H(i), nonzero(&mut rng)));
                }
            }
            match sim.step(&changes, !cfg.dense_h) {
                Ok(r) => break r,
                Err(Error::Singular) if attempts < 16 => attempts += 1,
                Err(e) => return Err(e),
            }
        };
        observe(&sim, &report);
        if report.reset {
            resets.push(report.iteration);
        }
        iterations.push(report);
    }
    let total = iterations.iter().fold(OpCount::default(), |acc, r| OpCount {
        muls: acc.muls + r.update.muls + r.query.muls + r.reset_ops.muls,
        adds: acc.adds + r.update.adds + r.query.adds + r.reset_ops.adds,
    });
    Ok(IpmReport {
        n,
        d,
        seed: cfg.seed,
        modulus: modulus(),
        dense_h: cfg.dense_h,
        reset_mode: match cfg.policy.mode {
            ResetMode::Entries => "entries",
            ResetMode::Columns => "columns",
        },
        reset_exponent: cfg.policy.exponent,
        threshold: cfg.policy.threshold(n),
        schedule: plan,
        mismatches: iterations.iter().filter(|r| r.mismatch).count(),
        iterations,
        resets,
        total,
    })
}
