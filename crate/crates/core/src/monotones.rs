//! The ultraweak monotones: rank, nonnegative rank, λ_max, λ_min and ι.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::budget::{Budget, Deadline};
use crate::clique::{maximum_clique, Graph};
use crate::families::make_identity;
use crate::majorization::{decide, Outcome};
use crate::matrix::CommMatrix;
use crate::quantum::{psd_bounds, PsdBounds};
use crate::rational::{int, lcm_of_denominators, Rational};
use crate::transform::{reduce, StochasticPair};

/// Exact rank over the rationals (fraction-free elimination).
pub fn rank(c: &CommMatrix) -> usize {
    rank_of_rows(&c.to_rows())
}

pub fn rank_of_rows(rows: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let scale = Rational::from_integer(lcm_of_denominators(row));
            row.iter().map(|x| (x * &scale).to_integer()).collect()
        })
        .collect();
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::from(1);
    let mut r = 0;
    for col in 0..m {
        let Some(p) = (r..n).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..n {
            for j in col + 1..m {
                let v = &a[r][col] * &a[i][j] - &a[i][col] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[r][col].clone();
        r += 1;
        if r == n {
            break;
        }
    }
    r
}

/// `Σ_j max_i C_ij`.
pub fn lambda_max(c: &CommMatrix) -> Rational {
    (0..c.n_cols())
        .map(|j| c.column(j).into_iter().max().expect("nonempty column"))
        .sum()
}

/// `-Σ_j min_i C_ij`, always in `[-1, 0]`.
pub fn lambda_min(c: &CommMatrix) -> Rational {
    -(0..c.n_cols())
        .map(|j| c.column(j).into_iter().min().expect("nonempty column"))
        .sum::<Rational>()
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonality_graph(c: &CommMatrix) -> Graph {
    let n = c.n_rows();
    let mut g = Graph::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if dot(c.row(a), c.row(b)).is_zero() {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// A largest set of pairwise-orthogonal rows (lowest indices on ties).
pub fn max_orthogonal_rows(c: &CommMatrix) -> Vec<usize> {
    maximum_clique(&orthogonality_graph(c))
}

/// Largest `n` with `1_n ⪯ C`: the maximum number of pairwise-orthogonal rows.
pub fn iota(c: &CommMatrix) -> usize {
    max_orthogonal_rows(c).len()
}

/// `(L, R)` with `L·C·R = 1_ι` built from a maximum orthogonal row set.
pub fn iota_witness(c: &CommMatrix) -> StochasticPair {
    iota_witness_for_rows(c, &max_orthogonal_rows(c)).expect("maximum clique rows are orthogonal")
}

/// Witness built from a given set of pairwise-orthogonal rows: `L` selects
/// the rows, `R` sends each column in the support of the `i`-th row to
/// output `i` and spreads unused columns uniformly.
pub fn iota_witness_for_rows(c: &CommMatrix, rows: &[usize]) -> Option<StochasticPair> {
    let k = rows.len();
    if k == 0 || rows.iter().any(|&p| p >= c.n_rows()) {
        return None;
    }
    for (a, &p) in rows.iter().enumerate() {
        for &q in &rows[a + 1..] {
            if p == q || !dot(c.row(p), c.row(q)).is_zero() {
                return None;
            }
        }
    }
    let owner: Vec<Option<usize>> = (0..c.n_cols())
        .map(|q| rows.iter().position(|&p| !c.get(p, q).is_zero()))
        .collect();
    let spread = Rational::new(1.into(), (k as i64).into());
    let left = CommMatrix::from_fn(k, c.n_rows(), |i, p| if rows[i] == p { int(1) } else { int(0) }).ok()?;
    let right = CommMatrix::from_fn(c.n_cols(), k, |q, j| match owner[q] {
        Some(o) if o == j => int(1),
        Some(_) => int(0),
        None => spread.clone(),
    })
    .ok()?;
    Some(StochasticPair::new(left, right))
}

/// Nonnegative rank as a closed interval; `lo == hi` means exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NnegRank {
    pub lo: usize,
    pub hi: usize,
    /// How the bounds were obtained.
    pub method: String,
}

impl NnegRank {
    pub fn exact(&self) -> Option<usize> {
        (self.lo == self.hi).then_some(self.lo)
    }

    fn point(k: usize, method: &str) -> Self {
        Self {
            lo: k,
            hi: k,
            method: method.into(),
        }
    }
}

/// Exact value when rank ≤ 2, either dimension ≤ 3, or the rank is full.
pub fn nneg_rank_shortcut(c: &CommMatrix) -> Option<usize> {
    let r = rank(c);
    let small = c.n_rows().min(c.n_cols());
    (r <= 2 || small <= 3 || r == small).then_some(r)
}

/// Largest set of nonzero cells `(i,j)`, `(k,l)` with `C_il·C_kj = 0` for
/// every pair. Its size bounds the nonnegative rank from below. Empty when
/// there are more than 200 nonzero cells.
pub fn fooling_set(c: &CommMatrix) -> Vec<(usize, usize)> {
    let cells: Vec<(usize, usize)> = (0..c.n_rows())
        .flat_map(|i| (0..c.n_cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| !c.get(i, j).is_zero())
        .collect();
    if cells.len() > 200 {
        return Vec::new();
    }
    let mut g = Graph::new(cells.len());
    for (x, &(i, j)) in cells.iter().enumerate() {
        for (y, &(k, l)) in cells.iter().enumerate().skip(x + 1) {
            if c.get(i, l).is_zero() || c.get(k, j).is_zero() {
                g.add_edge(x, y);
            }
        }
    }
    maximum_clique(&g).into_iter().map(|x| cells[x]).collect()
}

/// Bounds available without any search: the shortcuts, `rank` below, and
/// the size of the reduced form above.
pub fn nneg_rank_bounds(c: &CommMatrix) -> NnegRank {
    if let Some(k) = nneg_rank_shortcut(c) {
        return NnegRank::point(k, "shortcut");
    }
    let lo = rank(c).max(fooling_set(c).len());
    let reduced = reduce(c).map(|t| t.matrix).unwrap_or_else(|_| c.clone());
    let hi = reduced.n_rows().min(reduced.n_cols()).min(c.n_rows().min(c.n_cols()));
    if lo == hi {
        NnegRank::point(lo, "reduced size")
    } else {
        NnegRank {
            lo,
            hi,
            method: "rank / reduced size".into(),
        }
    }
}

/// `min { k | C ⪯ 1_k }`, searching upward from the rank.
///
/// Each candidate `k` is decided by the majorization engine; if a decision
/// runs out of budget the result is the interval that is still open.
pub fn nneg_rank(c: &CommMatrix, budget: &Budget) -> NnegRank {
    let bounds = nneg_rank_bounds(c);
    if bounds.exact().is_some() {
        return bounds;
    }
    let deadline = Deadline::after(budget.time);
    let (mut lo, hi) = (bounds.lo, bounds.hi);
    while lo < hi {
        let remaining = deadline.remaining();
        if remaining.is_zero() {
            break;
        }
        let id = make_identity(lo).expect("lo >= 1");
        let verdict = decide(c, &id, &budget.clone().with_time(remaining));
        match verdict.outcome {
            Outcome::Majorizes => return NnegRank::point(lo, "witness"),
            Outcome::NotMajorizes => lo += 1,
            Outcome::Unknown => break,
        }
    }
    if lo == hi {
        NnegRank::point(lo, "search")
    } else {
        NnegRank {
            lo,
            hi,
            method: "search incomplete".into(),
        }
    }
}

/// All six monotones of one matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneReport {
    pub rank: usize,
    pub nneg_rank: NnegRank,
    pub psd: PsdBounds,
    pub lambda_max: Rational,
    pub lambda_min: Rational,
    pub iota: usize,
}

impl MonotoneReport {
    /// `ι ≤ λ_max ≤ psd_upper`, `⌈√rank⌉ ≤ psd_upper`, `rank ≤ nneg_lo`,
    /// `λ_min ∈ [-1, 0]`, `psd_upper ≤ nneg_hi`.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let upper = int(self.psd.upper as i64);
        if int(self.iota as i64) > self.lambda_max {
            bad.push(format!("iota {} > lambda_max {}", self.iota, self.lambda_max));
        }
        if self.lambda_max > upper {
            bad.push(format!("lambda_max {} > psd upper {}", self.lambda_max, self.psd.upper));
        }
        if crate::rational::ceil_sqrt(self.rank) > self.psd.upper {
            bad.push(format!("ceil(sqrt(rank {})) > psd upper {}", self.rank, self.psd.upper));
        }
        if self.rank > self.nneg_rank.lo {
            bad.push(format!("rank {} > nneg lower {}", self.rank, self.nneg_rank.lo));
        }
        if self.psd.lower > self.psd.upper {
            bad.push(format!("psd lower {} > upper {}", self.psd.lower, self.psd.upper));
        }
        if self.psd.upper > self.nneg_rank.hi {
            bad.push(format!("psd upper {} > nneg upper {}", self.psd.upper, self.nneg_rank.hi));
        }
        if self.lambda_min.is_positive() || self.lambda_min < int(-1) {
            bad.push(format!("lambda_min {} outside [-1,0]", self.lambda_min));
        }
        bad
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank,
            "nneg_rank": { "lo": self.nneg_rank.lo, "hi": self.nneg_rank.hi, "method": self.nneg_rank.method },
            "psd_rank": self.psd.to_json(),
            "lambda_min": self.lambda_min.to_string(),
            "iota": self.iota,
            "lambda_max": self.lambda_max.to_string(),
        })
    }
}

pub fn report(c: &CommMatrix, budget: &Budget) -> MonotoneReport {
    let nneg = nneg_rank(c, budget);
    let psd = psd_bounds(c, &nneg, budget);
    MonotoneReport {
        rank: rank(c),
        nneg_rank: nneg,
        psd,
        lambda_max: lambda_max(c),
        lambda_min: lambda_min(c),
        iota: iota(c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::catalog::*;
    use crate::families::{make_a, make_d, make_g, make_uniform};
    use crate::rational::rat;

    #[test]
    fn ranks() {
        assert_eq!(rank(&make_g(4, 2).unwrap()), 4);
        assert_eq!(rank(&make_uniform(5).unwrap()), 1);
        assert_eq!(rank(&k()), 3);
        assert_eq!(rank(&make_a(3).unwrap()), 3);
        assert_eq!(rank(&make_d(4, &rat(3, 4)).unwrap()), 1);
        assert_eq!(rank(&make_d(4, &rat(1, 2)).unwrap()), 4);
    }

    #[test]
    fn lambdas() {
        let d = d_3_third();
        assert_eq!(lambda_max(&d), int(2));
        assert_eq!(lambda_min(&d), rat(-1, 2));
        let id = make_identity(4).unwrap();
        assert_eq!(lambda_max(&id), int(4));
        assert_eq!(lambda_min(&id), int(0));
        assert_eq!(lambda_max(&table_d()), rat(5, 2));
        assert_eq!(lambda_min(&make_uniform(3).unwrap()), int(-1));
    }

    #[test]
    fn iota_values() {
        assert_eq!(iota(&make_identity(5).unwrap()), 5);
        assert_eq!(iota(&table_b()), 1);
        assert_eq!(iota(&make_g(4, 2).unwrap()), 2);
        assert_eq!(iota(&make_a(3).unwrap()), 1);
    }

    #[test]
    fn iota_witness_reproduces_both_decompositions() {
        let c = iota_example();
        let id2 = make_identity(2).unwrap();
        let w = iota_witness(&c);
        assert_eq!(max_orthogonal_rows(&c), vec![0, 3]);
        let expected_r = CommMatrix::new(vec![
            vec![int(1), int(0)],
            vec![int(1), int(0)],
            vec![rat(1, 2), rat(1, 2)],
            vec![int(0), int(1)],
            vec![int(0), int(1)],
        ])
        .unwrap();
        assert_eq!(w.right, expected_r);
        assert!(w.verifies(&id2, &c));
        let w2 = iota_witness_for_rows(&c, &[1, 2]).unwrap();
        let expected_r2 = CommMatrix::new(vec![
            vec![int(1), int(0)],
            vec![int(0), int(1)],
            vec![int(1), int(0)],
            vec![int(1), int(0)],
            vec![int(0), int(1)],
        ])
        .unwrap();
        assert_eq!(w2.right, expected_r2);
        assert!(w2.verifies(&id2, &c));
        assert!(iota_witness_for_rows(&c, &[0, 1]).is_none());
    }

    #[test]
    fn iota_witness_of_identity_is_identity() {
        let id = make_identity(3).unwrap();
        let w = iota_witness(&id);
        assert_eq!(w, StochasticPair::identity_for(&id));
    }

    #[test]
    fn nneg_shortcuts() {
        assert_eq!(nneg_rank_shortcut(&make_g(4, 2).unwrap()), Some(4));
        assert_eq!(nneg_rank_shortcut(&d_3_third()), Some(3));
        assert_eq!(nneg_rank_shortcut(&k()), None);
        assert_eq!(nneg_rank_bounds(&k()), NnegRank { lo: 4, hi: 4, method: "reduced size".into() });
        assert_eq!(fooling_set(&k()).len(), 4);
    }
}
