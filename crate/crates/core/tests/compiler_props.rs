mod common;

use common::*;
use matformula::{compile, Assignment, DenseMatrix, Error, Formula, Zp};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Replaces the first child of the first gate found with an input whose
/// dimensions break that gate's constraint.
fn perturb(rf: &RandomFormula) -> Option<RandomFormula> {
    fn walk(e: &Expr, inputs: &mut Vec<(usize, usize)>, dims: &dyn Fn(&Expr) -> (usize, usize)) -> Option<Expr> {
        let bad = |inputs: &mut Vec<(usize, usize)>, d: (usize, usize)| {
            inputs.push(d);
            Box::new(Expr::Input(inputs.len() - 1))
        };
        match e {
            Expr::Input(_) | Expr::Id(_) => None,
            Expr::Inv(a) => {
                let (r, c) = dims(a);
                Some(Expr::Inv(bad(inputs, (r + 1, c))))
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (r, c) = dims(a);
                let l = bad(inputs, (r + 1, c));
                Some(match e {
                    Expr::Add(..) => Expr::Add(l, b.clone()),
                    _ => Expr::Sub(l, b.clone()),
                })
            }
            Expr::Mul(a, b) => {
                let (r, c) = dims(a);
                Some(Expr::Mul(bad(inputs, (r, c + 1)), b.clone()))
            }
        }
    }
    let dims = |e: &Expr| expr_dims(e, &rf.inputs);
    let mut inputs = rf.inputs.clone();
    let root = walk(&rf.root, &mut inputs, &dims)?;
    Some(RandomFormula {
        inputs,
        root,
        rows: rf.rows,
        cols: rf.cols,
    })
}

fn expr_dims(e: &Expr, inputs: &[(usize, usize)]) -> (usize, usize) {
    match e {
        Expr::Input(k) => inputs[*k],
        Expr::Id(n) => (*n, *n),
        Expr::Inv(a) => expr_dims(a, inputs),
        Expr::Add(a, _) | Expr::Sub(a, _) => expr_dims(a, inputs),
        Expr::Mul(a, b) => (expr_dims(a, inputs).0, expr_dims(b, inputs).1),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn validation_flips_under_dimension_mutation(seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rf = random_formula(&mut r, 10, 6);
        prop_assert!(Formula::<Zp>::parse(&rf.dsl()).is_ok());
        if let Some(bad) = perturb(&rf) {
            prop_assert!(Formula::<Zp>::parse(&bad.dsl()).is_err(), "{}", bad.dsl());
        }
    }

    #[test]
    fn size_is_node_walk_sum(seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rf = random_formula(&mut r, 10, 6);
        let f = Formula::<Zp>::parse(&rf.dsl()).unwrap();
        prop_assert_eq!(f.size(), rf.size_bound());
        let c = compile(&f);
        prop_assert!(c.size() <= f.size());
        // every cell of N is written at most once
        prop_assert!(c.construction_writes() <= c.size() * c.size());
    }

    #[test]
    fn evaluate_matches_oracle_and_flags_non_executable(seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rf = random_formula(&mut r, 10, 6);
        let f = Formula::<Zp>::parse(&rf.dsl()).unwrap();
        let vals = rf.random_values(&mut r);
        let a = Assignment::new(&f, vals.iter().map(to_dense).collect()).unwrap();
        match (f.evaluate(&a), rf.eval(&vals)) {
            (Ok(v), Some(w)) => prop_assert_eq!(from_dense(&v), w),
            (Err(Error::NotExecutable { .. }), None) => {}
            (got, want) => prop_assert!(false, "{:?} vs {:?}", got.map(|_| ()), want.is_some()),
        }
        prop_assert_eq!(f.evaluate(&a), f.evaluate(&a));
    }

    #[test]
    fn executable_assignments_give_invertible_n(seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let rf = random_formula(&mut r, 10, 6);
        let f = Formula::<Zp>::parse(&rf.dsl()).unwrap();
        let c = compile(&f);
        if let Some(vals) = rf.executable_values(&mut r, 20) {
            let dense: Vec<DenseMatrix<Zp>> = vals.iter().map(to_dense).collect();
            let inv = c.instantiate_values(&dense).unwrap().invert().unwrap();
            let got = inv.select(c.output_rows(), c.output_cols());
            prop_assert_eq!(from_dense(&got), rf.eval(&vals).unwrap());
        }
    }
}

/// Non-executable inputs need not make `N` singular: the inner inverse's
/// determinant cancels in `inv(inv(M))`. Only the executable direction is
/// a theorem; this records how often the other direction fails.
#[test]
fn non_executable_inputs_with_invertible_n_exist() {
    let f = Formula::<Zp>::parse("input M:2x2; out inv(inv(M))").unwrap();
    let c = compile(&f);
    let m = DenseMatrix::<Zp>::from_i64_rows(&[&[1, 2], &[2, 4]]);
    assert!(matches!(
        f.evaluate(&Assignment::new(&f, vec![m.clone()]).unwrap()),
        Err(Error::NotExecutable { .. })
    ));
    let inv = c.instantiate_values(std::slice::from_ref(&m)).unwrap().invert().unwrap();
    assert_eq!(inv.select(c.output_rows(), c.output_cols()), m);

    let mut r = ChaCha8Rng::seed_from_u64(41);
    let (mut broken, mut invertible) = (0, 0);
    for _ in 0..300 {
        let rf = random_formula(&mut r, 10, 3);
        let vals: Vec<Mat> = rf
            .inputs
            .iter()
            .map(|&(a, b)| (0..a).map(|i| (0..b).map(|j| ((i + j) % 2) as u64).collect()).collect())
            .collect();
        if rf.eval(&vals).is_some() {
            continue;
        }
        broken += 1;
        let f = Formula::<Zp>::parse(&rf.dsl()).unwrap();
        let dense: Vec<DenseMatrix<Zp>> = vals.iter().map(to_dense).collect();
        if compile(&f).instantiate_values(&dense).unwrap().invert().is_ok() {
            invertible += 1;
        }
    }
    eprintln!("non-executable with invertible N: {invertible} of {broken}");
    assert!(broken > 0);
}
