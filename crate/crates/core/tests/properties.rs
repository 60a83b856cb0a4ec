use std::time::Duration;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use commtask_core::io::{parse, serialize};
use commtask_core::majorization::{decide, Outcome};
use commtask_core::monotones::{iota, lambda_max, lambda_min, nneg_rank_bounds, rank};
use commtask_core::rational::rat;
use commtask_core::transform::{add_zero_column, duplicate_row, reduce, split_column};
use commtask_core::{Budget, CommMatrix};

fn stochastic(max_rows: usize, max_cols: usize) -> impl Strategy<Value = CommMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(0i64..4, c), r).prop_map(|rows| {
            let data = rows
                .into_iter()
                .map(|mut w| {
                    if w.iter().all(|&x| x == 0) {
                        w[0] = 1;
                    }
                    let total: i64 = w.iter().sum();
                    w.into_iter().map(|x| rat(x, total)).collect()
                })
                .collect();
            CommMatrix::new(data).unwrap()
        })
    })
}

fn fast() -> Budget {
    let mut b = Budget::quick().with_time(Duration::from_millis(300));
    b.max_free_dims = 8;
    b.bb_nodes = 200;
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip(c in stochastic(5, 5)) {
        prop_assert_eq!(parse(&serialize(&c)).unwrap(), c);
    }

    #[test]
    fn monotones_do_not_increase(c in stochastic(4, 4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = c.shape();
        let rows = rng.gen_range(1..=3);
        let cols = rng.gen_range(1..=3);
        let l = common::random_stochastic(&mut rng, rows, a, 0.4);
        let r = common::random_stochastic(&mut rng, b, cols, 0.4);
        let image = l.multiply(&c).unwrap().multiply(&r).unwrap();
        prop_assert!(rank(&image) <= rank(&c));
        prop_assert!(iota(&image) <= iota(&c));
        prop_assert!(lambda_max(&image) <= lambda_max(&c));
        prop_assert!(lambda_min(&image) <= lambda_min(&c));
        prop_assert!(nneg_rank_bounds(&image).lo <= nneg_rank_bounds(&c).hi);
    }

    #[test]
    fn reduction_is_an_equivalence(c in stochastic(5, 5)) {
        let t = reduce(&c).unwrap();
        prop_assert!(t.verifies(&c));
        prop_assert_eq!(reduce(&t.matrix).unwrap().matrix, t.matrix);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decisions_are_sound(c in stochastic(3, 3), d in stochastic(3, 3)) {
        let v = decide(&c, &d, &fast());
        prop_assert!(v.verify(&c, &d));
        prop_assert_eq!(v.witness.is_some(), v.outcome == Outcome::Majorizes);
    }

    #[test]
    fn transforms_keep_the_class(c in stochastic(3, 3)) {
        let b = fast();
        for t in [split_column(&c, 0, &[rat(1, 3), rat(2, 3)]), duplicate_row(&c, 0), add_zero_column(&c)] {
            let t = t.unwrap();
            prop_assert!(t.verifies(&c));
            prop_assert_eq!(decide(&t.matrix, &c, &b).outcome, Outcome::Majorizes);
            prop_assert_eq!(decide(&c, &t.matrix, &b).outcome, Outcome::Majorizes);
        }
    }
}
