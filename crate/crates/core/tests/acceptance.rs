//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use matformula::apps::ipm::{simulate_with, IpmConfig};
use matformula::apps::lp::LinearProgram;
use matformula::apps::online_ls::OnlineLinearSystem;
use matformula::apps::qr::{finish, gram_schmidt};
use matformula::apps::simplex::{basic_solution, simplex_solve, SimplexOutcome};
use matformula::compiler::block_inverse;
use matformula::field::to_f64;
use matformula::ops;
use matformula::{
    compile, DenseMatrix, DynamicFormula, Error, Formula, InverseBackend, NaiveInverse,
    ResetPolicy, SmwInverse, SparseDelta, UpdateEvent, Zp,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ------------------------------------------------------------ criterion 1

fn soundness() -> Outcome {
    let mut r = rng(101);
    let (mut pairs, mut triple) = (0usize, 0usize);
    // non-executable draws, and those among them with N invertible anyway
    let (mut broken, mut invertible) = (0usize, 0usize);
    let mut max_depth = 0;
    while pairs < 500 {
        let rf = if pairs % 10 == 0 {
            triple_inverse_formula(&mut r, 6)
        } else {
            random_formula(&mut r, 10, 6)
        };
        let f = Formula::<Zp>::parse(&rf.dsl()).map_err(|e| format!("{e}: {}", rf.dsl()))?;
        check(f.gate_count() == rf.root.gates() && rf.root.gates() <= 10, || {
            format!("gate count of {}", rf.dsl())
        })?;
        let c = compile(&f);
        check(c.size() <= rf.size_bound(), || {
            format!("n_N = {} > {} for {}", c.size(), rf.size_bound(), rf.dsl())
        })?;
        let raw = rf.random_values(&mut r);
        if rf.eval(&raw).is_none() {
            let dense: Vec<DenseMatrix<Zp>> = raw.iter().map(to_dense).collect();
            let n = from_dense(&c.instantiate_values(&dense).map_err(|e| e.to_string())?);
            broken += 1;
            if mat_inv(&n).is_some() {
                invertible += 1;
            }
        }
        let Some(vals) = rf.executable_values(&mut r, 20) else {
            continue;
        };
        let dense: Vec<DenseMatrix<Zp>> = vals.iter().map(to_dense).collect();
        let n = from_dense(&c.instantiate_values(&dense).map_err(|e| e.to_string())?);
        let inv = mat_inv(&n).ok_or_else(|| format!("N singular for executable {}", rf.dsl()))?;
        let got: Mat = c
            .output_rows()
            .iter()
            .map(|&i| c.output_cols().iter().map(|&j| inv[i][j]).collect())
            .collect();
        let want = rf.eval(&vals).expect("executable");
        check(got == want, || format!("mismatch for {}", rf.dsl()))?;
        max_depth = max_depth.max(rf.root.inv_depth());
        if rf.root.inv_depth() >= 3 {
            triple += 1;
        }
        pairs += 1;
    }
    check(triple > 0, || "no triple-nested inversion".into())?;
    Ok(format!(
        "{pairs} pairs, {triple} with inversion depth >= 3 (max {max_depth}); N invertible on {invertible} of {broken} non-executable draws"
    ))
}

// ------------------------------------------------------------ criterion 2

fn block_inverse_suite() -> Outcome {
    let mut r = rng(202);
    let mut singular = 0;
    for case in 0..100 {
        let a_n = r.gen_range(1..=4);
        let d_n = r.gen_range(1..=4);
        let mut a = random_mat(&mut r, a_n, a_n);
        let b = random_mat(&mut r, a_n, d_n);
        let c = random_mat(&mut r, d_n, a_n);
        let mut d = random_mat(&mut r, d_n, d_n);
        match case % 4 {
            // A singular: repeat a row
            1 if a_n > 1 => a[a_n - 1] = a[0].clone(),
            1 => a[0][0] = 0,
            // Schur complement singular: D = C A^-1 B + E with E rank deficient
            2 => {
                if let Some(ai) = mat_inv(&a) {
                    let mut e = random_mat(&mut r, d_n, d_n);
                    e[d_n - 1] = vec![0; d_n];
                    d = mat_add(&mat_mul(&mat_mul(&c, &ai), &b), &e);
                }
            }
            _ => {}
        }
        let expect_singular = match mat_inv(&a) {
            None => true,
            Some(ai) => mat_rank(&mat_sub(&d, &mat_mul(&mat_mul(&c, &ai), &b))) < d_n,
        };
        let g: Mat = (0..a_n + d_n)
            .map(|i| {
                (0..a_n + d_n)
                    .map(|j| match (i < a_n, j < a_n) {
                        (true, true) => a[i][j],
                        (true, false) => b[i][j - a_n],
                        (false, true) => c[i - a_n][j],
                        (false, false) => d[i - a_n][j - a_n],
                    })
                    .collect()
            })
            .collect();
        match block_inverse(&to_dense(&a), &to_dense(&b), &to_dense(&c), &to_dense(&d)) {
            Ok(out) => {
                check(!expect_singular, || format!("case {case}: expected SingularError"))?;
                let prod = mat_mul(&from_dense(&out), &g);
                check(prod == eye(a_n + d_n), || format!("case {case}: product is not I"))?;
            }
            Err(Error::Singular) => {
                check(expect_singular, || format!("case {case}: spurious SingularError"))?;
                singular += 1;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(format!("100 quadruples, {singular} singular"))
}

// ------------------------------------------------------- criteria 3 and 4

#[derive(Default)]
struct Envelope {
    update: f64,
    query: f64,
    reset: f64,
}

fn random_delta(r: &mut ChaCha8Rng, base: &DenseMatrix<Zp>) -> SparseDelta<Zp> {
    let n = base.rows();
    let mut delta = SparseDelta::new(n, n);
    if r.gen_bool(0.1) {
        // kill a column of M + delta
        let j = r.gen_range(0..n);
        for i in 0..n {
            delta.set(i, j, -base[(i, j)]);
        }
        return delta;
    }
    let k = r.gen_range(1..=6);
    let cols: Vec<usize> = (0..k).map(|_| r.gen_range(0..n)).collect();
    let e = r.gen_range(1..=12);
    for _ in 0..e {
        let j = cols[r.gen_range(0..k)];
        delta.set(r.gen_range(0..n), j, Zp::new(r.gen_range(1..p())));
    }
    delta
}

fn differential_suite() -> (Outcome, Outcome) {
    let n = 16;
    let mut r = rng(303);
    let mut env = Envelope::default();
    let (mut updates, mut queries, mut resets, mut failures) = (0, 0, 0, 0);
    for seq in 0..100 {
        let m = loop {
            let m = random_mat(&mut r, n, n);
            if mat_inv(&m).is_some() {
                break to_dense(&m);
            }
        };
        let mut smw = SmwInverse::preprocess(m.clone()).expect("nonsingular");
        let mut naive = NaiveInverse::preprocess(m).expect("nonsingular");
        let (mut fail_smw, mut fail_naive) = (Vec::new(), Vec::new());
        for op in 0..200 {
            match r.gen_range(0..10) {
                0..=3 => {
                    let delta = random_delta(&mut r, smw.base());
                    let e = delta.nnz() as f64;
                    let k = delta.touched_columns().len() as f64;
                    let (res, cost) = ops::measure(|| smw.update(delta.clone()));
                    if res.is_err() {
                        fail_smw.push(op);
                    }
                    if naive.update(delta).is_err() {
                        fail_naive.push(op);
                    }
                    env.update = env.update.max(cost.muls as f64 / (n as f64 * e + k * k * k));
                    updates += 1;
                }
                4..=7 => {
                    let e = smw.delta().nnz() as f64;
                    let k = smw.delta().touched_columns().len() as f64;
                    let len = r.gen_range(1..=n);
                    let idx: Vec<usize> = (0..len).map(|_| r.gen_range(0..n)).collect();
                    let at = r.gen_range(0..n);
                    let (a, b, cost) = if r.gen_bool(0.5) {
                        let (a, cost) = ops::measure(|| smw.query_column(&idx, at));
                        (a, naive.query_column(&idx, at), cost)
                    } else {
                        let (a, cost) = ops::measure(|| smw.query_row(at, &idx));
                        (a, naive.query_row(at, &idx), cost)
                    };
                    if a != b {
                        return (Err(format!("sequence {seq}, op {op}: answers differ")), Err("suite aborted".into()));
                    }
                    let bound = len as f64 * e + k * k;
                    if cost.muls > 0 {
                        env.query = env.query.max(cost.muls as f64 / bound);
                    }
                    queries += 1;
                }
                _ => {
                    let k = smw.delta().touched_columns().len() as f64;
                    let ((), cost) = ops::measure(|| smw.reset());
                    naive.reset();
                    if cost.muls > 0 {
                        env.reset = env.reset.max(cost.muls as f64 / ((n * n) as f64 * k));
                    }
                    resets += 1;
                }
            }
        }
        if fail_smw != fail_naive {
            return (
                Err(format!("sequence {seq}: failures at {fail_smw:?} vs {fail_naive:?}")),
                Err("suite aborted".into()),
            );
        }
        failures += fail_smw.len();
    }
    let c3 = Ok(format!(
        "100 sequences x 200 ops ({updates} updates, {queries} queries, {resets} resets), {failures} singular updates at identical positions"
    ));
    let c = env.update.max(env.query).max(env.reset);
    let detail = format!(
        "max ratios update {:.3}, query {:.3}, reset {:.3}; c = 8",
        env.update, env.query, env.reset
    );
    let c4 = if c.is_finite() && c <= 8.0 { Ok(detail) } else { Err(detail) };
    (c3, c4)
}

// ------------------------------------------------------------ criterion 5

fn random_event(r: &mut ChaCha8Rng, inputs: &[(usize, usize)]) -> UpdateEvent<Zp> {
    let k = r.gen_range(0..inputs.len());
    let (rows, cols) = inputs[k];
    // small values make singular assignments reasonably common
    let small = r.gen_bool(0.3);
    let val = |r: &mut ChaCha8Rng| {
        if small {
            Zp::new(r.gen_range(0..2))
        } else {
            Zp::new(r.gen_range(0..p()))
        }
    };
    match r.gen_range(0..10) {
        0..=4 => UpdateEvent::entry(k, r.gen_range(0..rows), r.gen_range(0..cols), val(r)),
        5 | 6 => {
            let j = r.gen_range(0..cols);
            UpdateEvent::column(k, j, (0..rows).map(|_| val(r)).collect())
        }
        7 => {
            let i = r.gen_range(0..rows);
            UpdateEvent::row(k, i, (0..cols).map(|_| val(r)).collect())
        }
        _ => {
            let count = r.gen_range(1..=4);
            let entries = (0..count)
                .map(|_| (r.gen_range(0..rows), r.gen_range(0..cols), val(r)))
                .collect();
            UpdateEvent::batch(k, entries)
        }
    }
}

fn end_to_end() -> Outcome {
    let mut r = rng(505);
    let (mut episodes, mut queried, mut breaks) = (0, 0usize, 0);
    while episodes < 100 {
        let rf = random_formula(&mut r, 8, 6);
        if rf.inputs.is_empty() {
            continue;
        }
        let Some(mut vals) = rf.executable_values(&mut r, 20) else {
            continue;
        };
        let f = Formula::<Zp>::parse(&rf.dsl()).map_err(|e| e.to_string())?;
        let a = matformula::Assignment::new(&f, vals.iter().map(to_dense).collect()).map_err(|e| e.to_string())?;
        let policies = [ResetPolicy::always(), ResetPolicy::entries(0.5), ResetPolicy::never()];
        let mut dfs: Vec<DynamicFormula<Zp>> = policies
            .iter()
            .map(|&pol| DynamicFormula::open(&f, &a, pol))
            .collect::<Result<_, _>>()
            .map_err(|e| format!("open: {e}"))?;
        for ev_idx in 0..50 {
            let ev = random_event(&mut r, &rf.inputs);
            let mut next = vals.clone();
            for (i, j, v) in ev.writes() {
                next[ev.input][i][j] = v.value();
            }
            let want = rf.eval(&next);
            for (t, df) in dfs.iter_mut().enumerate() {
                let res = df.apply(std::slice::from_ref(&ev));
                match (&want, res) {
                    (Some(_), Ok(())) => {}
                    (None, Err(Error::Singular)) => {}
                    (w, res) => {
                        return Err(format!(
                            "episode {episodes}, event {ev_idx}, policy {t}: oracle executable = {}, apply = {res:?}; {}",
                            w.is_some(),
                            rf.dsl().replace('\n', " ")
                        ))
                    }
                }
            }
            match want {
                Some(w) => {
                    vals = next;
                    for (t, df) in dfs.iter().enumerate() {
                        check(from_dense(&df.value()) == w, || {
                            format!("episode {episodes}, event {ev_idx}, policy {t}: wrong value; {}", rf.dsl())
                        })?;
                        queried += w.len() * w[0].len();
                    }
                }
                None => {
                    breaks += 1;
                    // rolled back: still answers for the previous values
                    let w = rf.eval(&vals).expect("previous values executable");
                    for df in &dfs {
                        check(from_dense(&df.value()) == w, || format!("episode {episodes}: rollback"))?;
                    }
                }
            }
        }
        episodes += 1;
    }
    Ok(format!(
        "100 episodes x 50 events, {queried} entries checked over 3 policies, {breaks} non-executable events rejected at the oracle's index"
    ))
}

// ------------------------------------------------------------ criterion 6

fn to_program(lp: &RandomLp) -> Result<LinearProgram, String> {
    LinearProgram::new(q_dense(&lp.a), lp.b.clone(), lp.c.clone()).map_err(|e| e.to_string())
}

fn simplex_twin() -> Outcome {
    let mut r = rng(606);
    let (mut optimal, mut unbounded, mut enumerated, mut total_pivots) = (0, 0, 0, 0);
    for case in 0..50 {
        let lp = random_lp(&mut r, 6, 12);
        let prog = to_program(&lp)?;
        let got = simplex_solve(&prog, &lp.basis, ResetPolicy::entries(0.5)).map_err(|e| format!("case {case}: {e}"))?;
        let twin = tableau_simplex(&lp);
        match (&got, &twin) {
            (
                SimplexOutcome::Optimal { objective, basis, pivots, x },
                TwinOutcome::Optimal { objective: o2, basis: b2, pivots: p2 },
            ) => {
                check(pivots == p2 && basis == b2 && objective == o2, || {
                    format!("case {case}: pivots {pivots:?} vs {p2:?}, objective {objective} vs {o2}")
                })?;
                check(prog.is_feasible(x) && q_dot(&lp.c, x) == *objective, || format!("case {case}: point"))?;
                let (vertices, best) = vertex_enumeration(&lp);
                if vertices.len() <= 12 {
                    check(best.as_ref() == Some(objective), || {
                        format!("case {case}: enumeration best {best:?} vs {objective}")
                    })?;
                    enumerated += 1;
                }
                total_pivots += pivots.len();
                optimal += 1;
            }
            (SimplexOutcome::Unbounded { pivots, .. }, TwinOutcome::Unbounded { pivots: p2 }) => {
                check(pivots == p2, || format!("case {case}: pivots {pivots:?} vs {p2:?}"))?;
                total_pivots += pivots.len();
                unbounded += 1;
            }
            _ => return Err(format!("case {case}: outcomes differ: {got:?} vs {twin:?}")),
        }
    }
    Ok(format!(
        "50 LPs ({optimal} optimal, {unbounded} unbounded, {total_pivots} pivots), {enumerated} optima confirmed by vertex enumeration"
    ))
}

// ------------------------------------------------------------ criterion 7

fn basic_solutions() -> Outcome {
    let mut r = rng(707);
    let mut moves = 0;
    for case in 0..25 {
        let mut lp = random_lp(&mut r, 6, 12);
        let (d, n) = (lp.a.len(), lp.c.len());
        let x: Vec<_> = (0..n)
            .map(|_| if r.gen_bool(0.8) { q(r.gen_range(1..=5), r.gen_range(1..=3)) } else { qzero() })
            .collect();
        lp.b = lp.a.iter().map(|row| q_dot(row, &x)).collect();
        // c in the row space of A makes every feasible point optimal
        let all_optimal = case % 2 == 0;
        if all_optimal {
            let y: Vec<_> = (0..d).map(|_| q(r.gen_range(-4..=4), 1)).collect();
            lp.c = (0..n).map(|j| (0..d).fold(qzero(), |acc, i| acc + y[i].clone() * lp.a[i][j].clone())).collect();
        }
        let prog = to_program(&lp)?;
        let out = basic_solution(&prog, &x, ResetPolicy::entries(0.5)).map_err(|e| format!("case {case}: {e}"))?;
        let xp = &out.x;
        check(prog.is_feasible(xp) && xp.iter().all(|v| *v >= qzero()), || format!("case {case}: infeasible"))?;
        let support: Vec<usize> = (0..n).filter(|&j| xp[j] != qzero()).collect();
        check(support.len() <= d, || format!("case {case}: support {}", support.len()))?;
        check(q_rank(&q_columns(&lp.a, &support)) == support.len(), || {
            format!("case {case}: support columns dependent")
        })?;
        let (c0, c1) = (q_dot(&lp.c, &x), q_dot(&lp.c, xp));
        if all_optimal {
            check(c0 == c1, || format!("case {case}: objective {c1} vs {c0}"))?;
        } else {
            check(c1 >= c0, || format!("case {case}: objective decreased"))?;
        }
        moves += out.moves;
    }
    Ok(format!("25 instances (13 with every feasible point optimal), {moves} kernel moves"))
}

// ------------------------------------------------------------ criterion 8

fn online_ls() -> Outcome {
    let mut r = rng(808);
    let mut pushes = 0;
    for inst in 0..20 {
        let n = if inst == 0 { 32 } else { r.gen_range(2..=24) };
        let (a, b) = loop {
            let a: QMat = (0..n).map(|_| (0..n).map(|_| q(r.gen_range(-5..=5), 1)).collect()).collect();
            let ok = (1..=n).all(|s| q_rank(&a[..s].iter().map(|row| row[..s].to_vec()).collect()) == s);
            if ok {
                let b: Vec<_> = (0..n).map(|_| q(r.gen_range(-9..=9), r.gen_range(1..=4))).collect();
                break (a, b);
            }
        };
        let mut st = OnlineLinearSystem::new(n, ResetPolicy::entries(0.5)).map_err(|e| e.to_string())?;
        let df = st.dynamic();
        let (di, bi, vi) = (df.input_index("D").unwrap(), df.input_index("B").unwrap(), df.input_index("d").unwrap());
        for s in 0..n {
            let x = st.push(a[s].clone(), b[s].clone()).map_err(|e| format!("instance {inst}, push {s}: {e}"))?;
            let lead: QMat = a[..=s].iter().map(|row| row[..=s].to_vec()).collect();
            let want = q_solve(&lead, &b[..=s]).expect("nonsingular prefix");
            check(x == want, || format!("instance {inst}, push {s}: prefix answer"))?;
            let ev = st.last_events();
            check(
                ev.len() == 3
                    && ev[0] == UpdateEvent::entry(di, s, s, q(1, 1))
                    && ev[1] == UpdateEvent::row(bi, s, a[s].clone())
                    && ev[2] == UpdateEvent::entry(vi, s, 0, b[s].clone()),
                || format!("instance {inst}, push {s}: events {ev:?}"),
            )?;
            pushes += 1;
        }
    }
    Ok(format!("20 instances (largest n = 32), {pushes} pushes exact with 3 events each"))
}

// ------------------------------------------------------------ criterion 9

fn qr_suite() -> Outcome {
    let mut r = rng(909);
    let (mut deficient, mut worst) = (0, 0f64);
    for case in 0..25 {
        let d = r.gen_range(1..=8);
        let n = r.gen_range(1..=10);
        let mut cols: Vec<Vec<i64>> = Vec::new();
        for j in 0..n {
            let col: Vec<i64> = if j > 0 && case % 2 == 1 && r.gen_bool(0.4) {
                // integer combination of earlier columns, or zero
                let mut c = vec![0i64; d];
                for prev in &cols {
                    let w = r.gen_range(-2..=2);
                    for i in 0..d {
                        c[i] += w * prev[i];
                    }
                }
                c
            } else {
                (0..d).map(|_| r.gen_range(-6..=6)).collect()
            };
            cols.push(col);
        }
        let v: QMat = (0..d).map(|i| (0..n).map(|j| q(cols[j][i], 1)).collect()).collect();
        let vm = q_dense(&v);
        let gs = gram_schmidt(&vm, ResetPolicy::entries(0.5)).map_err(|e| format!("case {case}: {e}"))?;
        let vp: Vec<Vec<_>> = (0..n).map(|j| gs.orthogonal.column(j)).collect();
        for i in 0..n {
            for j in i + 1..n {
                check(q_dot(&vp[i], &vp[j]) == qzero(), || format!("case {case}: columns {i}, {j} not orthogonal"))?;
            }
        }
        let profile: Vec<usize> = (1..=n).map(|s| q_rank(&q_columns(&v, &(0..s).collect::<Vec<_>>()))).collect();
        check(gs.rank_profile() == profile, || format!("case {case}: rank profile"))?;
        let rank = profile[n - 1];
        if rank < n {
            deficient += 1;
        }
        let vb: QMat = (0..d).map(|i| gs.independent.iter().map(|&j| vp[j][i].clone()).collect()).collect();
        let joined: QMat = (0..d).map(|i| v[i].iter().chain(vb[i].iter()).cloned().collect()).collect();
        check(q_rank(&vb) == rank && q_rank(&joined) == rank, || format!("case {case}: span"))?;
        let fq = finish(&gs, &vm);
        let k = gs.independent.len();
        for a in 0..k {
            for b in 0..k {
                let dot: f64 = (0..d).map(|i| fq.q[(i, a)] * fq.q[(i, b)]).sum();
                let err = (dot - if a == b { 1.0 } else { 0.0 }).abs();
                worst = worst.max(err);
            }
        }
        for i in 0..d {
            for j in 0..n {
                let qr: f64 = (0..k).map(|t| fq.q[(i, t)] * fq.r[(t, j)]).sum();
                worst = worst.max((qr - to_f64(&v[i][j])).abs());
            }
        }
        check(worst <= 1e-9, || format!("case {case}: float error {worst:e}"))?;
    }
    Ok(format!("25 matrices ({deficient} with dependent columns), max float error {worst:.2e}"))
}

// ----------------------------------------------------------- criterion 10

/// Smallest `t` with `t^m >= n`, i.e. `ceil(n^(1/m))`.
fn integer_root_ceil(n: u64, m: u32) -> usize {
    (1..).find(|t: &u64| t.pow(m) >= n).unwrap() as usize
}

fn ipm_suite() -> Outcome {
    let n = 64;
    let mut resets = 0;
    let mut iterations = 0;
    for (x, m) in [(0.25, 4u32), (0.5, 2u32)] {
        let threshold = integer_root_ceil(n as u64, m);
        for seed in 0..10 {
            let cfg = IpmConfig {
                n,
                iterations: 8,
                seed,
                policy: ResetPolicy::entries(x),
                dense_h: false,
            };
            let mut problem = None;
            let report = simulate_with(&cfg, |sim, it| {
                let asg = sim.dynamic().assignment();
                let v: Vec<Mat> = asg.values().iter().map(from_dense).collect();
                // D*At*inv(A*D*D*At)*A*D*h
                let (dm, at, a, h) = (&v[0], &v[1], &v[2], &v[3]);
                let gram = mat_mul(&mat_mul(&mat_mul(a, dm), dm), at);
                let want = mat_inv(&gram).map(|gi| {
                    let left = mat_mul(&mat_mul(dm, at), &gi);
                    mat_mul(&mat_mul(&mat_mul(&left, a), dm), h)
                });
                let got: Mat = sim.output().iter().map(|z| vec![z.value()]).collect();
                if problem.is_none() {
                    if want.as_ref() != Some(&got) || it.mismatch {
                        problem = Some(format!("x = {x}, seed {seed}, iteration {}: output mismatch", it.iteration));
                    } else if it.reset != (it.accumulated >= threshold) {
                        problem = Some(format!(
                            "x = {x}, seed {seed}, iteration {}: reset {} with |U| = {}",
                            it.iteration, it.reset, it.accumulated
                        ));
                    }
                }
            })
            .map_err(|e| format!("x = {x}, seed {seed}: {e}"))?;
            if let Some(p) = problem {
                return Err(p);
            }
            check(report.mismatches == 0 && report.threshold == Some(threshold), || {
                format!("x = {x}, seed {seed}: report")
            })?;
            let json = serde_json::to_string(&report).map_err(|e| e.to_string())?;
            check(json.contains("\"iterations\"") && json.contains("\"muls\""), || "report lacks counters".into())?;
            resets += report.resets.len();
            iterations += report.iterations.len();
        }
    }
    Ok(format!(
        "n = 64, T = 8, 10 seeds x 2 exponents: {iterations} iterations exact, {resets} resets at |U| >= 3 and 8"
    ))
}

// ----------------------------------------------------------- criterion 11

fn speedup() -> Outcome {
    let n = 256;
    let mut r = rng(1111);
    let m = to_dense(&random_mat(&mut r, n, n));
    let threshold = integer_root_ceil(n as u64, 2);
    let mut smw = SmwInverse::preprocess(m.clone()).map_err(|e| e.to_string())?;
    let mut naive = NaiveInverse::preprocess(m).map_err(|e| e.to_string())?;
    let stream: Vec<(usize, usize, Zp)> = (0..64)
        .map(|_| (r.gen_range(0..n), r.gen_range(0..n), Zp::new(r.gen_range(1..p()))))
        .collect();

    // accumulate entry changes since the last reset, as a dynamic formula does
    let run = |backend: &mut dyn InverseBackend<Zp>, events: &[(usize, usize, Zp)], reset_at: usize| {
        let mut pending: BTreeMap<(usize, usize), Zp> = BTreeMap::new();
        let mut total = 0u64;
        for &(i, j, v) in events {
            let ((), cost) = ops::measure(|| {
                pending.insert((i, j), v - backend.base()[(i, j)]);
                let mut delta = SparseDelta::new(n, n);
                for (&(a, b), &x) in &pending {
                    delta.set(a, b, x);
                }
                backend.update(delta).expect("random update stays nonsingular");
                let rows: Vec<usize> = (0..n).collect();
                let _ = backend.query_column(&rows, j);
                if pending.len() >= reset_at {
                    backend.reset();
                    pending.clear();
                }
            });
            total += cost.muls;
        }
        total as f64 / events.len() as f64
    };
    let smw_cost = run(&mut smw, &stream, threshold);
    let naive_cost = run(&mut naive, &stream[..3], threshold);
    let ratio = naive_cost / smw_cost;
    let detail = format!("per event: SMW {smw_cost:.0} muls, naive {naive_cost:.0} muls, ratio {ratio:.1}");
    if ratio >= 20.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ------------------------------------------------------------------ main

fn main() {
    let (c3, c4) = {
        let start = Instant::now();
        let (a, b) = std::panic::catch_unwind(differential_suite)
            .unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
        let t = start.elapsed();
        (timed(a, t, 120), timed(b, t, 120))
    };
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "formula soundness", run(soundness, 60)),
        (2, "block inverse", run(block_inverse_suite, 10)),
        (3, "SMW vs naive differential", c3),
        (4, "cost envelopes", c4),
        (5, "dynamic formula end-to-end", run(end_to_end, 120)),
        (6, "simplex twin", run(simplex_twin, 120)),
        (7, "basic solutions", run(basic_solutions, 60)),
        (8, "online linear systems", run(online_ls, 60)),
        (9, "QR", run(qr_suite, 60)),
        (10, "IPM schedule", run(ipm_suite, 120)),
        (11, "speedup", run(speedup, 120)),
    ];
    let mut failed = 0;
    for (id, name, res) in &results {
        match res {
            Ok(msg) => println!("PASS criterion {id} ({name}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn run(f: fn() -> Outcome, limit_secs: u64) -> Outcome {
    let start = Instant::now();
    let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
    timed(res, start.elapsed(), limit_secs)
}

fn timed(res: Outcome, t: Duration, limit_secs: u64) -> Outcome {
    let secs = t.as_secs_f64();
    match res {
        Ok(msg) if secs <= limit_secs as f64 => Ok(format!("{msg} [{secs:.1} s]")),
        Ok(msg) => Err(format!("{msg} but took {secs:.1} s > {limit_secs} s")),
        Err(msg) => Err(format!("{msg} [{secs:.1} s]")),
    }
}
