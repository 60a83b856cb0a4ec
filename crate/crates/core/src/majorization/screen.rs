//! Refutation by monotones.

use crate::matrix::CommMatrix;
use crate::monotones::{iota, lambda_max, lambda_min, nneg_rank_bounds, rank};
use crate::quantum::{psd_lower, psd_upper_certified};
use crate::rational::{int, Rational};

use super::verdict::{Certificate, Monotone};

/// Order in which [`screen`] tries the monotones.
pub const SCREEN_ORDER: [Monotone; 6] = [
    Monotone::Rank,
    Monotone::Iota,
    Monotone::LambdaMax,
    Monotone::LambdaMin,
    Monotone::NnegRank,
    Monotone::PsdRank,
];

fn size(n: usize) -> Rational {
    int(n as i64)
}

/// Values compared for a separation. The two ranks use a certified lower
/// bound on `C` against a certified upper bound on `D`.
pub fn monotone_values(f: Monotone, c: &CommMatrix, d: &CommMatrix) -> Option<(Rational, Rational)> {
    Some(match f {
        Monotone::Rank => (size(rank(c)), size(rank(d))),
        Monotone::Iota => (size(iota(c)), size(iota(d))),
        Monotone::LambdaMax => (lambda_max(c), lambda_max(d)),
        Monotone::LambdaMin => (lambda_min(c), lambda_min(d)),
        Monotone::NnegRank => (size(nneg_rank_bounds(c).lo), size(nneg_rank_bounds(d).hi)),
        Monotone::PsdRank => {
            let upper = psd_upper_certified(d, nneg_rank_bounds(d).hi).0;
            (size(psd_lower(c).0), size(upper))
        }
    })
}

fn separation(f: Monotone, c: &CommMatrix, d: &CommMatrix) -> Option<Certificate> {
    let (on_c, on_d) = monotone_values(f, c, d)?;
    (on_c > on_d).then_some(Certificate::MonotoneSeparation { monotone: f, on_c, on_d })
}

/// First monotone with `f(C) > f(D)`, which proves `C ⋠ D`.
pub fn screen(c: &CommMatrix, d: &CommMatrix) -> Option<Certificate> {
    SCREEN_ORDER.iter().find_map(|&f| separation(f, c, d))
}

/// Every monotone with `f(C) > f(D)`.
pub fn separations(c: &CommMatrix, d: &CommMatrix) -> Vec<Certificate> {
    SCREEN_ORDER.iter().filter_map(|&f| separation(f, c, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::catalog::*;
    use crate::families::{make_a, make_identity};

    fn monotone_of(cert: &Certificate) -> Monotone {
        match cert {
            Certificate::MonotoneSeparation { monotone, .. } => *monotone,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rank_separates_k_plus_from_k() {
        let cert = screen(&k_plus(), &k()).unwrap();
        assert_eq!(monotone_of(&cert), Monotone::Rank);
        assert!(cert.check(&k_plus(), &k()));
    }

    #[test]
    fn psd_separates_a_from_trine_matrix() {
        let cert = screen(&table_a(), &d_3_third()).unwrap();
        assert_eq!(monotone_of(&cert), Monotone::PsdRank);
        assert!(cert.check(&table_a(), &d_3_third()));
        assert!(screen(&d_3_third(), &table_a()).is_none());
    }

    #[test]
    fn reflexive_pairs_pass() {
        for (_, m, _) in comparison_table() {
            assert!(screen(&m, &m).is_none());
        }
    }

    #[test]
    fn identity_against_antidistinguishability() {
        let cert = screen(&make_identity(3).unwrap(), &make_a(3).unwrap()).unwrap();
        assert_eq!(monotone_of(&cert), Monotone::Iota);
    }

    #[test]
    fn single_monotone_pairs() {
        let pairs = [
            (table_b(), table_a(), Monotone::LambdaMin),
            (table_c(), table_b(), Monotone::Iota),
            (table_d(), table_c(), Monotone::LambdaMax),
        ];
        for (c, d, f) in pairs {
            let found: Vec<_> = separations(&c, &d).iter().map(monotone_of).collect();
            assert_eq!(found, vec![f]);
        }
    }
}
