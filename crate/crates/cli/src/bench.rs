//! Counter-instrumented comparison of the SMW and naive backends on
//! single-entry update streams.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use matformula::field::modulus;
use matformula::{ops, DenseMatrix, Error, InverseBackend, NaiveInverse, OpCount, ResetPolicy, Result, SmwInverse, SparseDelta, Zp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub events: usize,
    pub naive_events: usize,
    pub threshold: Option<usize>,
    pub resets: usize,
    pub smw: OpCount,
    pub naive: OpCount,
}

impl Row {
    pub fn smw_per_event(&self) -> f64 {
        self.smw.muls as f64 / self.events as f64
    }

    pub fn naive_per_event(&self) -> f64 {
        self.naive.muls as f64 / self.naive_events as f64
    }
}

/// Applies `events` one at a time, accumulating entry changes since the
/// last reset and reading the changed column after each. Returns the
/// operations performed and the number of resets.
fn replay(
    backend: &mut dyn InverseBackend<Zp>,
    events: &[(usize, usize, Zp)],
    policy: ResetPolicy,
) -> Result<(OpCount, usize)> {
    let n = backend.dim();
    let rows: Vec<usize> = (0..n).collect();
    let mut pending: BTreeMap<(usize, usize), Zp> = BTreeMap::new();
    let mut resets = 0;
    let (res, cost) = ops::measure(|| -> Result<()> {
        for &(i, j, v) in events {
            pending.insert((i, j), v - backend.base()[(i, j)]);
            let mut delta = SparseDelta::new(n, n);
            for (&(a, b), &x) in &pending {
                delta.set(a, b, x);
            }
            backend.update(delta)?;
            backend.query_column(&rows, j);
            let d = backend.delta();
            if policy.fires(n, d.nnz(), d.touched_columns().len()) {
                backend.reset();
                pending.clear();
                resets += 1;
            }
        }
        Ok(())
    });
    res?;
    Ok((cost, resets))
}

pub fn smw(sizes: &[usize], events: usize, naive_events: usize, policy: ResetPolicy, seed: u64) -> Result<Vec<Row>> {
    if events == 0 || naive_events == 0 {
        return Err(Error::InvalidInput("event counts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &n in sizes {
        if n == 0 {
            return Err(Error::InvalidInput("sizes must be positive".into()));
        }
        let (mut smw, mut naive) = loop {
            let m = DenseMatrix::from_fn(n, n, |_, _| Zp::new(rng.gen_range(0..modulus())));
            match SmwInverse::preprocess(m.clone()) {
                Ok(s) => break (s, NaiveInverse::preprocess(m)?),
                Err(Error::Singular) => continue,
                Err(e) => return Err(e),
            }
        };
        let stream: Vec<(usize, usize, Zp)> = (0..events)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), Zp::new(rng.gen_range(1..modulus()))))
            .collect();
        let (smw_cost, resets) = replay(&mut smw, &stream, policy)?;
        let k = naive_events.min(events);
        let (naive_cost, _) = replay(&mut naive, &stream[..k], policy)?;
        out.push(Row {
            n,
            events,
            naive_events: k,
            threshold: policy.threshold(n),
            resets,
            smw: smw_cost,
            naive: naive_cost,
        });
    }
    Ok(out)
}

pub fn csv(rows: &[Row]) -> String {
    let mut s = String::from(
        "n,events,naive_events,threshold,resets,smw_muls,smw_adds,naive_muls,naive_adds,smw_muls_per_event,naive_muls_per_event,ratio\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{:.1},{:.1},{:.2}",
            r.n,
            r.events,
            r.naive_events,
            r.threshold.map_or(String::new(), |t| t.to_string()),
            r.resets,
            r.smw.muls,
            r.smw.adds,
            r.naive.muls,
            r.naive.adds,
            r.smw_per_event(),
            r.naive_per_event(),
            r.naive_per_event() / r.smw_per_event(),
        );
    }
    s
}
