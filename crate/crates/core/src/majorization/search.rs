//! Heuristic witness search: alternating linear programs with multi-start,
//! followed by exact rounding and verification.

use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::budget::{Budget, Deadline};
use crate::lp::{convex_combination, LinearProgram, LpOutcome, Relation};
use crate::matrix::CommMatrix;
use crate::rational::{rationalize, Rational};
use crate::transform::StochasticPair;

/// Denominator cap used when rounding floating-point candidates.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

type Dense = Vec<Vec<f64>>;

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn residual(c: &Dense, d: &Dense, l: &Dense, r: &Dense) -> f64 {
    let p = matmul(&matmul(l, d), r);
    c.iter()
        .zip(&p)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Each row of `L` minimizes `max_j |C_ij − (L·M)_ij|` with `M = D·R`.
fn solve_left(c: &Dense, d: &Dense, r: &Dense) -> Option<(Dense, f64)> {
    let m = matmul(d, r);
    let k = m.len();
    let mut left = Vec::with_capacity(c.len());
    let mut worst = 0.0f64;
    for target in c {
        let mut lp = LinearProgram::<f64>::new(k + 1);
        lp.objective[k] = 1.0;
        lp.add((0..k).map(|p| (p, 1.0)).collect(), Relation::Eq, 1.0);
        for (j, &t) in target.iter().enumerate() {
            let mut coeffs: Vec<(usize, f64)> = (0..k).filter(|&p| m[p][j] != 0.0).map(|p| (p, m[p][j])).collect();
            coeffs.push((k, -1.0));
            lp.add(coeffs.clone(), Relation::Le, t);
            coeffs.last_mut().unwrap().1 = 1.0;
            lp.add(coeffs, Relation::Ge, t);
        }
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                worst = worst.max(value);
                left.push(x[..k].iter().map(|v| v.max(0.0)).collect());
            }
            _ => return None,
        }
    }
    Some((left, worst))
}

/// `R` minimizing `max_ij |C_ij − (N·R)_ij|` with `N = L·D`.
fn solve_right(c: &Dense, d: &Dense, l: &Dense) -> Option<(Dense, f64)> {
    let n = matmul(l, d);
    let q = d.first().map_or(0, Vec::len);
    let b = c.first().map_or(0, Vec::len);
    let var = |row: usize, j: usize| row * b + j;
    let t = q * b;
    let mut lp = LinearProgram::<f64>::new(t + 1);
    lp.objective[t] = 1.0;
    for row in 0..q {
        lp.add((0..b).map(|j| (var(row, j), 1.0)).collect(), Relation::Eq, 1.0);
    }
    for (i, target) in c.iter().enumerate() {
        for (j, &cij) in target.iter().enumerate() {
            let mut coeffs: Vec<(usize, f64)> =
                (0..q).filter(|&s| n[i][s] != 0.0).map(|s| (var(s, j), n[i][s])).collect();
            coeffs.push((t, -1.0));
            lp.add(coeffs.clone(), Relation::Le, cij);
            coeffs.last_mut().unwrap().1 = 1.0;
            lp.add(coeffs, Relation::Ge, cij);
        }
    }
    match lp.solve() {
        LpOutcome::Optimal { x, value } => {
            let r = (0..q).map(|row| (0..b).map(|j| x[var(row, j)].max(0.0)).collect()).collect();
            Some((r, value))
        }
        _ => None,
    }
}

/// Rounds each row to rationals with bounded denominators and fixes the
/// row sum exactly on the largest entry.
pub fn round_stochastic(rows: &Dense) -> Option<CommMatrix> {
    let exact: Option<Vec<Vec<Rational>>> = rows
        .iter()
        .map(|row| {
            let mut r: Vec<Rational> = row
                .iter()
                .map(|&x| {
                    let v = rationalize(x, MAX_DENOMINATOR);
                    if v.is_negative() {
                        Rational::zero()
                    } else {
                        v
                    }
                })
                .collect();
            let sum: Rational = r.iter().sum();
            let big = (0..r.len()).max_by(|&a, &b| r[a].cmp(&r[b]).then(b.cmp(&a)))?;
            r[big] += Rational::one() - sum;
            (!r[big].is_negative()).then_some(r)
        })
        .collect();
    CommMatrix::new(exact?).ok()
}

/// Exact `L` with `L·(D·R) = C`, row by row.
pub fn exact_left(c: &CommMatrix, d: &CommMatrix, r: &CommMatrix) -> Option<StochasticPair> {
    let m = d.multiply(r).ok()?;
    let points = m.to_rows();
    let rows: Option<Vec<Vec<Rational>>> = c.rows().map(|target| convex_combination(&points, target)).collect();
    let pair = StochasticPair::new(CommMatrix::new(rows?).ok()?, r.clone());
    pair.verifies(c, d).then_some(pair)
}

/// Exact `R` with `(L·D)·R = C`.
pub fn exact_right(c: &CommMatrix, d: &CommMatrix, l: &CommMatrix) -> Option<StochasticPair> {
    let n = l.multiply(d).ok()?;
    let q = n.n_cols();
    let b = c.n_cols();
    let mut lp = LinearProgram::<Rational>::new(q * b);
    for row in 0..q {
        lp.add((0..b).map(|j| (row * b + j, Rational::one())).collect(), Relation::Eq, Rational::one());
    }
    for i in 0..c.n_rows() {
        for j in 0..b {
            let coeffs = (0..q)
                .filter(|&s| !n.get(i, s).is_zero())
                .map(|s| (s * b + j, n.get(i, s).clone()))
                .collect();
            lp.add(coeffs, Relation::Eq, c.get(i, j).clone());
        }
    }
    let LpOutcome::Optimal { x, .. } = lp.solve() else {
        return None;
    };
    let rows = (0..q).map(|row| x[row * b..(row + 1) * b].to_vec()).collect();
    let pair = StochasticPair::new(l.clone(), CommMatrix::new(rows).ok()?);
    pair.verifies(c, d).then_some(pair)
}

/// Turns a floating-point candidate into an exactly verified witness.
pub fn exactify(c: &CommMatrix, d: &CommMatrix, l: &Dense, r: &Dense) -> Option<StochasticPair> {
    if let Some(w) = round_stochastic(r).and_then(|re| exact_left(c, d, &re)) {
        return Some(w);
    }
    round_stochastic(l).and_then(|le| exact_right(c, d, &le))
}

fn one_hot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Dense {
    (0..rows)
        .map(|_| {
            let hit = rng.gen_range(0..cols);
            (0..cols).map(|j| if j == hit { 1.0 } else { 0.0 }).collect()
        })
        .collect()
}

fn cyclic(rows: usize, cols: usize) -> Dense {
    (0..rows)
        .map(|q| (0..cols).map(|j| if j == q % cols { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub witness: Option<StochasticPair>,
    pub best_residual: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_start(
    c: &CommMatrix,
    d: &CommMatrix,
    cf: &Dense,
    df: &Dense,
    start: usize,
    budget: &Budget,
    deadline: &Deadline,
    best: &AtomicU64,
) -> Option<StochasticPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (a, b) = (cf.len(), cf[0].len());
    let (dr, dc) = (df.len(), df[0].len());
    let try_right_from = |l: &Dense| -> Result<Dense, Option<StochasticPair>> {
        let (r, res) = solve_right(cf, df, l).ok_or(None)?;
        best.fetch_min(res.to_bits(), Ordering::Relaxed);
        if res < budget.tol {
            if let Some(w) = exactify(c, d, l, &r) {
                return Err(Some(w));
            }
        }
        Ok(r)
    };
    let mut right = match start {
        0 => cyclic(dc, b),
        1 => match try_right_from(&cyclic(a, dr)) {
            Ok(r) => r,
            Err(found) => return found,
        },
        s if s % 2 == 0 => one_hot(dc, b, &mut rng),
        _ => match try_right_from(&one_hot(a, dr, &mut rng)) {
            Ok(r) => r,
            Err(found) => return found,
        },
    };
    let mut last = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..budget.alternations {
        if deadline.expired() {
            return None;
        }
        let (l, res) = solve_left(cf, df, &right)?;
        best.fetch_min(res.to_bits(), Ordering::Relaxed);
        if res < budget.tol {
            if let Some(w) = exactify(c, d, &l, &right) {
                return Some(w);
            }
        }
        right = match try_right_from(&l) {
            Ok(r) => r,
            Err(found) => return found,
        };
        if res > last - 1e-12 {
            stalled += 1;
            if stalled >= 3 {
                return None;
            }
        } else {
            stalled = 0;
        }
        last = res;
    }
    None
}

/// Multi-start alternating search. Deterministic for a given budget: the
/// witness from the lowest-numbered successful start is returned.
pub fn search_witness_detailed(c: &CommMatrix, d: &CommMatrix, budget: &Budget) -> SearchOutcome {
    let deadline = Deadline::after(budget.time);
    let cf = c.to_f64();
    let df = d.to_f64();
    let best = AtomicU64::new(f64::INFINITY.to_bits());
    let witness = (0..budget.starts.max(2))
        .into_par_iter()
        .find_map_first(|s| run_start(c, d, &cf, &df, s, budget, &deadline, &best));
    let best_residual = if witness.is_some() { 0.0 } else { f64::from_bits(best.load(Ordering::Relaxed)) };
    SearchOutcome { witness, best_residual }
}

pub fn search_witness(c: &CommMatrix, d: &CommMatrix, budget: &Budget) -> Option<StochasticPair> {
    search_witness_detailed(c, d, budget).witness
}
