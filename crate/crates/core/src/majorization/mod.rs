//! Deciding `C ⪯ D`, i.e. whether `C = L·D·R` for row-stochastic `L`, `R`.

pub mod bnb;
pub mod dfamily;
pub mod screen;
pub mod search;
pub mod verdict;

use std::fmt;
use std::time::Instant;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::budget::{Budget, Deadline};
use crate::families::{as_d_family, make_identity};
use crate::lp::convex_combination;
use crate::matrix::CommMatrix;
use crate::monotones::{iota_witness, max_orthogonal_rows};
use crate::rational::{int, Rational};
use crate::transform::{compose_witnesses, reduce, StochasticPair};

pub use bnb::{decide_certified, free_dims, LeafBound, SearchTree, TreeNode};
pub use dfamily::{d_family_lambda, d_family_witness, decide_d_family, grid_point_agrees, qudit_d_interval, QuditInterval};
pub use screen::{monotone_values, screen, separations, SCREEN_ORDER};
pub use search::{search_witness, search_witness_detailed, SearchOutcome};
pub use verdict::{Certificate, Monotone, Outcome, Verdict};

fn unit(n: usize, hot: usize) -> Vec<Rational> {
    (0..n).map(|j| if j == hot { int(1) } else { int(0) }).collect()
}

fn distinct_rows(c: &CommMatrix) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for r in c.rows() {
        if !out.iter().any(|x| x.as_slice() == r) {
            out.push(r.to_vec());
        }
    }
    out
}

/// Exact `(L, R)` with `C = L·1_k·R` when one of the direct constructions
/// applies: few extreme rows, few nonzero columns, or either of these after
/// reduction. `None` means only that no construction was found.
pub fn factor_through_identity(c: &CommMatrix, k: usize) -> Option<StochasticPair> {
    if k == 0 {
        return None;
    }
    let rows = distinct_rows(c);
    let vertices: Vec<Vec<Rational>> = rows
        .iter()
        .enumerate()
        .filter(|(i, r)| {
            let others: Vec<Vec<Rational>> =
                rows.iter().enumerate().filter(|(j, _)| j != i).map(|(_, x)| x.clone()).collect();
            convex_combination(&others, r).is_none()
        })
        .map(|(_, r)| r.clone())
        .collect();
    if !vertices.is_empty() && vertices.len() <= k {
        let left: Option<Vec<Vec<Rational>>> = c
            .rows()
            .map(|r| {
                let mut w = convex_combination(&vertices, r)?;
                w.resize(k, Rational::zero());
                Some(w)
            })
            .collect();
        let mut right = vertices.clone();
        right.resize(k, vertices[0].clone());
        let pair = StochasticPair::new(CommMatrix::new(left?).ok()?, CommMatrix::new(right).ok()?);
        if pair.verifies(c, &make_identity(k).ok()?) {
            return Some(pair);
        }
    }
    let support: Vec<usize> = (0..c.n_cols()).filter(|&j| c.column(j).iter().any(|x| !x.is_zero())).collect();
    if support.len() <= k {
        let left = CommMatrix::from_fn(c.n_rows(), k, |i, p| support.get(p).map_or_else(Rational::zero, |&j| c.get(i, j).clone())).ok()?;
        let right = CommMatrix::new((0..k).map(|p| unit(c.n_cols(), *support.get(p).unwrap_or(&support[0]))).collect()).ok()?;
        let pair = StochasticPair::new(left, right);
        if pair.verifies(c, &make_identity(k).ok()?) {
            return Some(pair);
        }
    }
    let t = reduce(c).ok()?;
    if t.matrix.shape() == c.shape() {
        return None;
    }
    factor_through_identity(&t.matrix, k)?.then(&t.backward).ok()
}

fn finish(mut v: Verdict, started: Instant) -> Verdict {
    v.elapsed = started.elapsed();
    v
}

/// Decides `C ⪯ D`.
///
/// `Majorizes` always carries an exactly verified witness and `NotMajorizes`
/// a certificate that [`Certificate::check`] re-verifies.
pub fn decide(c: &CommMatrix, d: &CommMatrix, budget: &Budget) -> Verdict {
    let started = Instant::now();
    let deadline = Deadline::after(budget.time);
    if c == d {
        let w = StochasticPair::identity_for(c);
        return finish(Verdict::majorizes(w.clone(), Certificate::ExactWitness(w), "trivial"), started);
    }
    if d.is_identity() {
        if let Some(w) = factor_through_identity(c, d.n_rows()) {
            return finish(Verdict::majorizes(w.clone(), Certificate::ExactWitness(w), "construction"), started);
        }
    }
    if let (Some((n, mu)), Some((m, eps))) = (as_d_family(c), as_d_family(d)) {
        if n == m {
            let rule = format!("D_{{{n},{mu}}} vs D_{{{n},{eps}}}");
            if decide_d_family(n, &eps, &mu).unwrap_or(false) {
                if let Ok(w) = d_family_witness(n, &eps, &mu) {
                    if w.verifies(c, d) {
                        return finish(Verdict::majorizes(w.clone(), Certificate::ExactWitness(w), "closed-form"), started);
                    }
                }
            } else if let Some(sep) = dfamily::separating_lambda(c, d) {
                let cert = Certificate::ClosedForm {
                    rule,
                    separation: Some(sep),
                };
                return finish(Verdict::refuted(cert, "closed-form"), started);
            }
        }
    }
    if let Some(cert) = screen(c, d) {
        return finish(Verdict::refuted(cert, "screen"), started);
    }
    // C ⪯ 1_ι(D) ⪯ D
    let k = max_orthogonal_rows(d).len();
    if let Some(w) = factor_through_identity(c, k) {
        if let Ok(w) = compose_witnesses(&w, &iota_witness(d)) {
            if w.verifies(c, d) {
                return finish(Verdict::majorizes(w.clone(), Certificate::ExactWitness(w), "construction"), started);
            }
        }
    }
    let exact_search = free_dims(c, d) <= budget.max_free_dims;
    let search_time = if exact_search { deadline.remaining() / 4 } else { deadline.remaining() };
    let found = search_witness_detailed(c, d, &budget.clone().with_time(search_time));
    if let Some(w) = found.witness {
        return finish(Verdict::majorizes(w.clone(), Certificate::ExactWitness(w), "search"), started);
    }
    let residual = found.best_residual.is_finite().then_some(found.best_residual);
    if exact_search && !deadline.expired() {
        let mut v = decide_certified(c, d, &budget.clone().with_time(deadline.remaining()));
        if v.outcome == Outcome::Unknown {
            v.residual = match (v.residual, residual) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        return finish(v, started);
    }
    finish(Verdict::unknown(residual), started)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    NotEquivalent,
    Unknown,
}

impl fmt::Display for Equivalence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equivalence::Equivalent => "Equivalent",
            Equivalence::NotEquivalent => "NotEquivalent",
            Equivalence::Unknown => "Unknown",
        })
    }
}

/// Both directions of an equivalence test.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceVerdict {
    pub outcome: Equivalence,
    /// `C ⪯ D`.
    pub forward: Verdict,
    /// `D ⪯ C`.
    pub backward: Verdict,
}

impl EquivalenceVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "outcome": self.outcome.to_string(),
            "forward": self.forward.to_json(),
            "backward": self.backward.to_json(),
        })
    }
}

/// `C ≃ D`. A refutation in either direction settles `NotEquivalent` even
/// when the other direction is undecided.
pub fn equivalent(c: &CommMatrix, d: &CommMatrix, budget: &Budget) -> EquivalenceVerdict {
    let forward = decide(c, d, budget);
    let backward = decide(d, c, budget);
    let outcome = match (forward.outcome, backward.outcome) {
        (Outcome::NotMajorizes, _) | (_, Outcome::NotMajorizes) => Equivalence::NotEquivalent,
        (Outcome::Majorizes, Outcome::Majorizes) => Equivalence::Equivalent,
        _ => Equivalence::Unknown,
    };
    EquivalenceVerdict {
        outcome,
        forward,
        backward,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::catalog::*;
    use crate::families::{make_a, make_d};
    use crate::rational::rat;

    #[test]
    fn identity_targets() {
        let id3 = make_identity(3).unwrap();
        let v = decide(&make_d(3, &rat(1, 6)).unwrap(), &id3, &Budget::quick());
        assert_eq!(v.outcome, Outcome::Majorizes);
        assert!(v.verify(&make_d(3, &rat(1, 6)).unwrap(), &id3));
        let a3 = make_a(3).unwrap();
        let v = decide(&a3, &id3, &Budget::quick());
        assert_eq!(v.outcome, Outcome::Majorizes);
        assert!(v.verify(&a3, &id3));
    }

    #[test]
    fn iota_refutation() {
        let v = decide(&make_identity(3).unwrap(), &make_a(3).unwrap(), &Budget::quick());
        assert_eq!(v.outcome, Outcome::NotMajorizes);
        assert_eq!(v.stage, "screen");
    }

    #[test]
    fn factoring_k_needs_four_outputs() {
        assert!(factor_through_identity(&k(), 4).is_some());
        assert!(factor_through_identity(&k(), 3).is_none());
    }

    #[test]
    fn equivalence_examples() {
        let b = Budget::quick();
        let a3 = make_a(3).unwrap();
        let d31 = make_d(3, &int(1)).unwrap();
        assert_eq!(equivalent(&a3, &d31, &b).outcome, Equivalence::Equivalent);
        assert_eq!(equivalent(&k(), &k_minus(), &b).outcome, Equivalence::NotEquivalent);
        assert_eq!(equivalent(&table_c(), &table_c(), &b).outcome, Equivalence::Equivalent);
    }
}
