mod common;

use std::time::Duration;

use commtask_core::families::catalog::*;
use commtask_core::families::{d_compose, make_a, make_d, make_g, make_identity, make_uniform};
use commtask_core::io::{parse, serialize};
use commtask_core::majorization::{
    d_family_lambda, decide, decide_certified, decide_d_family, equivalent, qudit_d_interval, screen,
    search_witness, Certificate, Equivalence, Monotone, Outcome,
};
use commtask_core::monotones::{iota, lambda_max, lambda_min, nneg_rank, rank, report};
use commtask_core::quantum::{
    psd_bounds, psd_lower, psd_upper, quantum_dim_bounds, qubit_screen, scaled_submatrix, witness_library,
};
use commtask_core::rational::{int, rat};
use commtask_core::transform::{add_convex_row, reduce, split_column};
use commtask_core::{Budget, CommMatrix, Rational};

use common::brute_force_iota;

fn m(rows: &[&[i64]], den: i64) -> CommMatrix {
    CommMatrix::new(rows.iter().map(|r| r.iter().map(|&x| rat(x, den)).collect()).collect()).unwrap()
}

/// `D_{n,ε}` straight from its entries: `1 − ε` on the diagonal, `ε/(n−1)` elsewhere.
fn d_by_hand(n: usize, eps: Rational) -> CommMatrix {
    let off = &eps / int(n as i64 - 1);
    CommMatrix::from_fn(n, n, |i, j| if i == j { int(1) - &eps } else { off.clone() }).unwrap()
}

#[test]
fn generators() {
    assert_eq!(make_d(3, &int(0)).unwrap(), make_identity(3).unwrap());
    assert_eq!(make_d(4, &rat(3, 4)).unwrap(), make_uniform(4).unwrap());
    assert_eq!(make_d(3, &rat(1, 3)).unwrap(), m(&[&[4, 1, 1], &[1, 4, 1], &[1, 1, 4]], 6));
    assert_eq!(make_d(3, &int(1)).unwrap(), m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]], 2));
    assert_eq!(make_g(3, 1).unwrap(), make_a(3).unwrap());
    assert_eq!(make_a(3).unwrap(), m(&[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]], 2));
    let g42 = make_g(4, 2).unwrap();
    assert_eq!(g42.shape(), (6, 4));
    assert_eq!(g42.row(0), &[rat(1, 2), rat(1, 2), int(0), int(0)]);
    let g32 = make_g(3, 2).unwrap();
    let b = Budget::quick();
    assert_eq!(equivalent(&g32, &make_identity(3).unwrap(), &b).outcome, Equivalence::Equivalent);
}

#[test]
fn products_in_the_d_family() {
    let d = make_d(3, &rat(1, 3)).unwrap();
    assert_eq!(make_identity(3).unwrap().multiply(&d).unwrap(), d);
    let square = d.multiply(&d).unwrap();
    // entrywise: 4/9 + 1/36 + 1/36 = 1/2 on the diagonal
    assert_eq!(square, d_by_hand(3, rat(1, 2)));
    assert_eq!(d_compose(3, &rat(1, 3), &rat(1, 3)).unwrap(), rat(1, 2));
    let v3 = make_uniform(3).unwrap();
    assert_eq!(v3.multiply(&make_d(3, &rat(1, 4)).unwrap()).unwrap(), v3);
    assert_eq!(d_compose(5, &rat(2, 7), &int(0)).unwrap(), rat(2, 7));
    assert_eq!(d_compose(3, &rat(2, 3), &rat(1, 4)).unwrap(), rat(2, 3));
}

#[test]
fn transforms_and_reduction() {
    let id2 = make_identity(2).unwrap();
    let t = split_column(&id2, 0, &[rat(1, 2), rat(1, 2)]).unwrap();
    assert_eq!(t.matrix, m(&[&[1, 1, 0], &[0, 0, 2]], 2));
    assert!(t.verifies(&id2));
    let t = add_convex_row(&id2, &[rat(1, 2), rat(1, 2)]).unwrap();
    assert_eq!(t.matrix.shape(), (3, 2));
    assert!(t.verifies(&id2));

    let c = m(&[&[2, 2, 0], &[0, 0, 4], &[1, 1, 2]], 4);
    let r = reduce(&c).unwrap();
    assert_eq!(r.matrix.shape(), (2, 2));
    assert!(r.matrix.is_identity());
    assert!(r.verifies(&c));
    assert_eq!(reduce(&r.matrix).unwrap().matrix, r.matrix);
    let id3 = make_identity(3).unwrap();
    assert_eq!(reduce(&id3).unwrap().matrix, id3);

    let d31 = make_d(3, &int(1)).unwrap();
    let r = reduce(&d31).unwrap();
    assert!(r.verifies(&d31));
    let eq = equivalent(&r.matrix, &make_a(3).unwrap(), &Budget::quick());
    assert_eq!(eq.outcome, Equivalence::Equivalent);
}

#[test]
fn parsing() {
    let c = parse(r#"[["1/2","1/2"],["0","1"]]"#).unwrap();
    assert_eq!(c, m(&[&[1, 1], &[0, 2]], 2));
    let err = parse(r#"[["1/2","2/5"],["0","1"]]"#).unwrap_err().to_string();
    assert!(err.contains("row 0"), "{err}");
    let d = make_d(3, &rat(1, 3)).unwrap();
    assert_eq!(parse(&serialize(&d)).unwrap(), d);
}

#[test]
fn monotone_values() {
    assert_eq!(rank(&make_g(4, 2).unwrap()), 4);
    assert_eq!(rank(&make_uniform(5).unwrap()), 1);
    assert_eq!(rank(&k()), 3);
    let d = make_d(3, &rat(1, 3)).unwrap();
    assert_eq!((lambda_max(&d), lambda_min(&d)), (int(2), rat(-1, 2)));
    let id4 = make_identity(4).unwrap();
    assert_eq!((lambda_max(&id4), lambda_min(&id4)), (int(4), int(0)));
    assert_eq!(lambda_max(&table_d()), rat(5, 2));
    assert_eq!(iota(&id4), 4);
    assert_eq!(iota(&table_b()), 1);
    let g42 = make_g(4, 2).unwrap();
    assert_eq!(iota(&g42), brute_force_iota(&g42));
    assert_eq!(iota(&g42), 2);
}

#[test]
fn nonnegative_ranks() {
    let b = Budget::quick();
    assert_eq!(nneg_rank(&make_g(4, 2).unwrap(), &b).exact(), Some(4));
    assert_eq!(nneg_rank(&k(), &b).exact(), Some(4));
    assert_eq!(nneg_rank(&d_3_third(), &b).exact(), Some(3));
}

#[test]
fn reports() {
    let b = Budget::quick();
    let r = report(&k_minus(), &b);
    assert_eq!((r.rank, r.nneg_rank.exact(), r.psd.exact()), (3, Some(3), Some(3)));
    assert_eq!((r.lambda_min.clone(), r.iota, r.lambda_max.clone()), (int(0), 2, int(2)));

    // V_2: every row (1/2, 1/2), so Σ max = 1 and -Σ min = -1
    let r = report(&make_uniform(2).unwrap(), &b);
    assert_eq!((r.rank, r.nneg_rank.exact(), r.psd.exact()), (1, Some(1), Some(1)));
    assert_eq!((r.lambda_min.clone(), r.iota, r.lambda_max.clone()), (int(-1), 1, int(1)));

    let r = report(&make_identity(4).unwrap(), &b);
    assert_eq!((r.rank, r.nneg_rank.exact(), r.psd.exact(), r.iota), (4, Some(4), Some(4), 4));
    assert!(r.invariant_violations().is_empty());
}

#[test]
fn psd_rank_bounds() {
    assert_eq!(psd_lower(&table_a()).0, 3);
    assert_eq!(psd_lower(&make_g(4, 2).unwrap()).0, 3);
    assert_eq!(psd_lower(&make_uniform(4).unwrap()).0, 1);
    let b = Budget::quick();
    assert_eq!(psd_upper(&d_3_third(), &b).0, 2);
    assert!(psd_upper(&make_g(4, 2).unwrap(), &b).0 <= 3);
    assert_eq!(psd_upper(&make_identity(3).unwrap(), &b).0, 3);
    assert_eq!(quantum_dim_bounds(&table_b(), &b), (3, 3));
    let psd = psd_bounds(&lambda_example_d(), &nneg_rank(&lambda_example_d(), &b), &b);
    assert_eq!(psd.exact(), Some(2));
}

#[test]
fn qubit_refutations() {
    assert!(qubit_screen(&make_identity(3).unwrap()).is_some());
    assert!(qubit_screen(&lambda_example_d()).is_none());
    // λ_max = tr = 2, so the trace-saturated model would need a
    // Gram matrix 2C_ab/C_bb − 1 that is not symmetric here
    assert!(qubit_screen(&lambda_example_c()).is_some());
    assert!(screen(&lambda_example_c(), &lambda_example_d()).is_some());
}

#[test]
fn scaled_submatrices() {
    let a3 = make_a(3).unwrap();
    let a4 = make_a(4).unwrap();
    let e = scaled_submatrix(&a3, &a4).unwrap();
    assert_eq!(e.t, rat(2, 3));
    assert_eq!(scaled_submatrix(&a4, &a4).unwrap().t, int(1));
    let e = scaled_submatrix(&k_minus(), &k()).unwrap();
    assert_eq!(e.t, int(1));
}

#[test]
fn library_targets() {
    for entry in witness_library() {
        let (ok, _) = commtask_core::quantum::verify_model(&entry.model, &entry.target, 1e-12).unwrap();
        assert!(ok, "{}", entry.name);
    }
}

#[test]
fn screening() {
    let cert = screen(&k_plus(), &k()).unwrap();
    assert!(matches!(cert, Certificate::MonotoneSeparation { monotone: Monotone::Rank, .. }));
    let cert = screen(&table_a(), &d_3_third()).unwrap();
    assert!(matches!(cert, Certificate::MonotoneSeparation { monotone: Monotone::PsdRank, .. }));
    assert!(screen(&table_c(), &table_c()).is_none());
}

#[test]
fn witness_search() {
    let b = Budget::default().with_time(Duration::from_secs(20));
    let (g31, g42) = (make_g(3, 1).unwrap(), make_g(4, 2).unwrap());
    assert!(search_witness(&g31, &g42, &b).unwrap().verifies(&g31, &g42));
    let (c, d) = (make_d(3, &rat(1, 2)).unwrap(), make_d(3, &rat(1, 3)).unwrap());
    assert!(search_witness(&c, &d, &b).unwrap().verifies(&c, &d));
    let c = table_c();
    assert!(search_witness(&c, &c, &b).unwrap().verifies(&c, &c));
}

#[test]
fn certified_decisions() {
    let b = Budget::default().with_time(Duration::from_secs(120));
    let v = decide_certified(&k_minus(), &table_c(), &b);
    assert_eq!(v.outcome, Outcome::NotMajorizes);
    assert!(v.verify(&k_minus(), &table_c()));
    let v = decide_certified(&table_c(), &k_minus(), &b);
    assert_eq!(v.outcome, Outcome::Majorizes);
    assert!(v.verify(&table_c(), &k_minus()));
    let (v3, d) = (make_uniform(3).unwrap(), make_d(3, &rat(1, 4)).unwrap());
    let v = decide_certified(&v3, &d, &b);
    assert_eq!(v.outcome, Outcome::Majorizes);
    assert!(v.verify(&v3, &d));
}

#[test]
fn pipeline_decisions() {
    let b = Budget::quick();
    let id3 = make_identity(3).unwrap();
    let a3 = make_a(3).unwrap();
    let d = make_d(3, &rat(1, 6)).unwrap();
    assert_eq!(decide(&d, &id3, &b).outcome, Outcome::Majorizes);
    let v = decide(&id3, &a3, &b);
    assert_eq!(v.outcome, Outcome::NotMajorizes);
    assert!(matches!(v.certificate, Some(Certificate::MonotoneSeparation { monotone: Monotone::Iota, .. })));
    let v = decide(&a3, &id3, &b);
    assert_eq!(v.outcome, Outcome::Majorizes);
    assert!(v.verify(&a3, &id3));
    assert_eq!(equivalent(&a3, &make_d(3, &int(1)).unwrap(), &b).outcome, Equivalence::Equivalent);
    assert_eq!(equivalent(&k(), &k_minus(), &b).outcome, Equivalence::NotEquivalent);
    assert_eq!(equivalent(&table_c(), &table_c(), &b).outcome, Equivalence::Equivalent);
}

#[test]
fn d_family_rules() {
    assert!(decide_d_family(3, &int(0), &int(1)).unwrap());
    assert!(!decide_d_family(3, &int(1), &rat(1, 3)).unwrap());
    assert!(decide_d_family(3, &rat(2, 3), &rat(2, 3)).unwrap());
    // diagonal of L_λ·D_{n,ε} is λ(1−ε) + (1−λ)ε/(n−1)
    let lambda = d_family_lambda(3, &rat(1, 3), &rat(1, 2)).unwrap();
    assert_eq!(&lambda * rat(2, 3) + (int(1) - &lambda) * rat(1, 6), rat(1, 2));
    assert_eq!(d_family_lambda(4, &rat(1, 5), &rat(1, 5)).unwrap(), int(1));
    assert_eq!(d_family_lambda(3, &int(0), &int(1)).unwrap(), int(0));
    let i = qudit_d_interval(3, 2);
    assert_eq!((i.lo, i.hi), (rat(1, 3), int(1)));
    let i = qudit_d_interval(2, 2);
    assert_eq!((i.lo, i.hi), (int(0), int(1)));
    let i = qudit_d_interval(10, 2);
    assert_eq!((i.lo, i.hi), (rat(9, 10), rat(9, 10)));
}
