//! Witness pairs and the equivalence-preserving transforms.

use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::families::make_identity;
use crate::io::to_value;
use crate::lp::convex_combination;
use crate::matrix::CommMatrix;
use crate::rational::{int, Rational};

/// Row-stochastic `(L, R)` used as `C = L·D·R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StochasticPair {
    pub left: CommMatrix,
    pub right: CommMatrix,
}

impl StochasticPair {
    pub fn new(left: CommMatrix, right: CommMatrix) -> Self {
        Self { left, right }
    }

    /// `(1_a, 1_b)` for an `a×b` matrix.
    pub fn identity_for(c: &CommMatrix) -> Self {
        Self {
            left: make_identity(c.n_rows()).expect("n >= 1"),
            right: make_identity(c.n_cols()).expect("n >= 1"),
        }
    }

    /// `L·D·R`.
    pub fn apply(&self, d: &CommMatrix) -> Result<CommMatrix> {
        self.left.multiply(d)?.multiply(&self.right)
    }

    /// True when `source = L·target·R` holds exactly.
    pub fn verifies(&self, source: &CommMatrix, target: &CommMatrix) -> bool {
        self.apply(target).map(|p| p == *source).unwrap_or(false)
    }

    /// Pair for applying `self` and then `next`: if `X = L·C·R` and
    /// `Y = L'·X·R'` then `Y = (L'L)·C·(RR')`.
    pub fn then(&self, next: &StochasticPair) -> Result<StochasticPair> {
        Ok(StochasticPair {
            left: next.left.multiply(&self.left)?,
            right: self.right.multiply(&next.right)?,
        })
    }
}

/// Witness for `a ⪯ c` from witnesses of `a ⪯ b` and `b ⪯ c`.
pub fn compose_witnesses(a_le_b: &StochasticPair, b_le_c: &StochasticPair) -> Result<StochasticPair> {
    b_le_c.then(a_le_b)
}

impl Serialize for StochasticPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("StochasticPair", 2)?;
        st.serialize_field("L", &to_value(&self.left))?;
        st.serialize_field("R", &to_value(&self.right))?;
        st.end()
    }
}

/// Output of an equivalence-preserving transform of `C`.
///
/// `forward` satisfies `matrix = L·C·R`, `backward` satisfies `C = L'·matrix·R'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transformed {
    pub matrix: CommMatrix,
    pub forward: StochasticPair,
    pub backward: StochasticPair,
}

impl Transformed {
    fn unchanged(c: &CommMatrix) -> Self {
        Self {
            matrix: c.clone(),
            forward: StochasticPair::identity_for(c),
            backward: StochasticPair::identity_for(c),
        }
    }

    fn then(&self, next: &Transformed) -> Result<Transformed> {
        Ok(Transformed {
            matrix: next.matrix.clone(),
            forward: self.forward.then(&next.forward)?,
            backward: next.backward.then(&self.backward)?,
        })
    }

    /// Checks both witness directions against `original`.
    pub fn verifies(&self, original: &CommMatrix) -> bool {
        self.forward.verifies(&self.matrix, original) && self.backward.verifies(original, &self.matrix)
    }
}

fn unit_rows(n_cols: usize, targets: impl IntoIterator<Item = usize>) -> Result<CommMatrix> {
    CommMatrix::new(
        targets
            .into_iter()
            .map(|t| (0..n_cols).map(|j| if j == t { int(1) } else { int(0) }).collect())
            .collect(),
    )
}

fn check_weights(weights: &[Rational], len: usize) -> Result<()> {
    if weights.len() != len {
        return Err(Error::Param(format!("expected {len} weights, got {}", weights.len())));
    }
    if weights.iter().any(|w| *w < Rational::zero()) {
        return Err(Error::Param("weights must be nonnegative".into()));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::Param(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// `new[i][j] = C[row_perm[i]][col_perm[j]]`.
pub fn permute(c: &CommMatrix, row_perm: &[usize], col_perm: &[usize]) -> Result<Transformed> {
    let (n, m) = c.shape();
    if !is_permutation(row_perm, n) || !is_permutation(col_perm, m) {
        return Err(Error::Param("invalid permutation".into()));
    }
    let matrix = CommMatrix::from_fn(n, m, |i, j| c.get(row_perm[i], col_perm[j]).clone())?;
    let mut row_inv = vec![0; n];
    for (i, &p) in row_perm.iter().enumerate() {
        row_inv[p] = i;
    }
    let mut col_inv = vec![0; m];
    for (j, &q) in col_perm.iter().enumerate() {
        col_inv[q] = j;
    }
    Ok(Transformed {
        matrix,
        forward: StochasticPair::new(unit_rows(n, row_perm.iter().copied())?, unit_rows(m, col_inv)?),
        backward: StochasticPair::new(unit_rows(n, row_inv)?, unit_rows(m, col_perm.iter().copied())?),
    })
}

/// Appends a copy of row `i`.
pub fn duplicate_row(c: &CommMatrix, i: usize) -> Result<Transformed> {
    let n = c.n_rows();
    if i >= n {
        return Err(Error::Param(format!("row {i} out of range")));
    }
    let mut weights = vec![int(0); n];
    weights[i] = int(1);
    add_convex_row(c, &weights)
}

/// Appends an all-zero column.
pub fn add_zero_column(c: &CommMatrix) -> Result<Transformed> {
    let (n, m) = c.shape();
    let matrix = CommMatrix::from_fn(n, m + 1, |i, j| if j < m { c.get(i, j).clone() } else { int(0) })?;
    Ok(Transformed {
        matrix,
        forward: StochasticPair::new(make_identity(n)?, unit_rows(m + 1, 0..m)?),
        backward: StochasticPair::new(make_identity(n)?, unit_rows(m, (0..m).chain([0]))?),
    })
}

/// Appends the row `Σ_k weights[k]·C_k`.
pub fn add_convex_row(c: &CommMatrix, weights: &[Rational]) -> Result<Transformed> {
    let (n, m) = c.shape();
    check_weights(weights, n)?;
    let mut rows = c.to_rows();
    rows.push(
        (0..m)
            .map(|j| weights.iter().enumerate().map(|(k, w)| w * c.get(k, j)).sum())
            .collect(),
    );
    let matrix = CommMatrix::new(rows)?;
    let mut left = make_identity(n)?.to_rows();
    left.push(weights.to_vec());
    let mut back_left = make_identity(n)?.to_rows();
    for row in &mut back_left {
        row.push(int(0));
    }
    Ok(Transformed {
        matrix,
        forward: StochasticPair::new(CommMatrix::new(left)?, make_identity(m)?),
        backward: StochasticPair::new(CommMatrix::new(back_left)?, make_identity(m)?),
    })
}

/// Replaces column `j` by `weights.len()` adjacent columns `w_k·C_j`.
pub fn split_column(c: &CommMatrix, j: usize, weights: &[Rational]) -> Result<Transformed> {
    let (n, m) = c.shape();
    if j >= m {
        return Err(Error::Param(format!("column {j} out of range")));
    }
    if weights.is_empty() {
        return Err(Error::Param("split needs at least one weight".into()));
    }
    check_weights(weights, weights.len())?;
    let k = weights.len();
    let new_m = m + k - 1;
    // original column of each new column, and the weight it carries
    let source = |q: usize| -> usize {
        if q < j {
            q
        } else if q < j + k {
            j
        } else {
            q - k + 1
        }
    };
    let matrix = CommMatrix::from_fn(n, new_m, |i, q| {
        let s = source(q);
        if s == j {
            &weights[q - j] * c.get(i, j)
        } else {
            c.get(i, s).clone()
        }
    })?;
    let right = CommMatrix::from_fn(m, new_m, |p, q| {
        if source(q) != p {
            int(0)
        } else if p == j {
            weights[q - j].clone()
        } else {
            int(1)
        }
    })?;
    Ok(Transformed {
        matrix,
        forward: StochasticPair::new(make_identity(n)?, right),
        backward: StochasticPair::new(make_identity(n)?, unit_rows(m, (0..new_m).map(source))?),
    })
}

/// `Some(α)` with `col_k = α·col_j`, for a nonzero `col_j`.
fn proportional(col_j: &[Rational], col_k: &[Rational]) -> Option<Rational> {
    let i0 = col_j.iter().position(|x| !x.is_zero())?;
    let alpha = &col_k[i0] / &col_j[i0];
    col_j
        .iter()
        .zip(col_k)
        .all(|(a, b)| &alpha * a == *b)
        .then_some(alpha)
}

/// Merges every column into the first column it is a nonnegative multiple of.
fn merge_columns(c: &CommMatrix) -> Result<Transformed> {
    let (n, m) = c.shape();
    let cols: Vec<Vec<Rational>> = (0..m).map(|j| c.column(j)).collect();
    let mut reps: Vec<usize> = Vec::new();
    // (group, α relative to the group representative)
    let mut assignment: Vec<(usize, Rational)> = Vec::with_capacity(m);
    for (k, col) in cols.iter().enumerate() {
        if col.iter().all(Zero::is_zero) {
            assignment.push((usize::MAX, int(0)));
            continue;
        }
        match reps
            .iter()
            .enumerate()
            .find_map(|(g, &r)| proportional(&cols[r], col).map(|a| (g, a)))
        {
            Some((g, alpha)) => assignment.push((g, alpha)),
            None => {
                reps.push(k);
                assignment.push((reps.len() - 1, int(1)));
            }
        }
    }
    for a in assignment.iter_mut() {
        if a.0 == usize::MAX {
            a.0 = 0;
        }
    }
    if reps.len() == m {
        return Ok(Transformed::unchanged(c));
    }
    let groups = reps.len();
    let mut totals = vec![int(0); groups];
    for (g, alpha) in &assignment {
        totals[*g] += alpha;
    }
    let matrix = CommMatrix::from_fn(n, groups, |i, g| &totals[g] * c.get(i, reps[g]))?;
    let forward_right = unit_rows(groups, assignment.iter().map(|(g, _)| *g))?;
    let backward_right = CommMatrix::from_fn(groups, m, |g, k| {
        let (gk, alpha) = &assignment[k];
        if *gk == g {
            alpha / &totals[g]
        } else {
            int(0)
        }
    })?;
    Ok(Transformed {
        matrix,
        forward: StochasticPair::new(make_identity(n)?, forward_right),
        backward: StochasticPair::new(make_identity(n)?, backward_right),
    })
}

/// Drops every row lying in the convex hull of the remaining rows.
fn drop_hull_rows(c: &CommMatrix) -> Result<Transformed> {
    let n = c.n_rows();
    let rows = c.to_rows();
    let mut kept: Vec<usize> = (0..n).collect();
    for i in (0..n).rev() {
        if kept.len() == 1 {
            break;
        }
        let others: Vec<Vec<Rational>> = kept
            .iter()
            .filter(|&&k| k != i)
            .map(|&k| rows[k].clone())
            .collect();
        if convex_combination(&others, &rows[i]).is_some() {
            kept.retain(|&k| k != i);
        }
    }
    if kept.len() == n {
        return Ok(Transformed::unchanged(c));
    }
    let points: Vec<Vec<Rational>> = kept.iter().map(|&k| rows[k].clone()).collect();
    let mut back_left = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        match kept.iter().position(|&k| k == i) {
            Some(p) => back_left.push((0..kept.len()).map(|q| if q == p { int(1) } else { int(0) }).collect()),
            None => back_left.push(
                convex_combination(&points, row)
                    .ok_or_else(|| Error::Infeasible("row left the hull of the kept rows".into()))?,
            ),
        }
    }
    Ok(Transformed {
        matrix: c.select_rows(&kept),
        forward: StochasticPair::new(unit_rows(n, kept.iter().copied())?, make_identity(c.n_cols())?),
        backward: StochasticPair::new(CommMatrix::new(back_left)?, make_identity(c.n_cols())?),
    })
}

/// Normal form under the inverse transforms: zero and proportional columns
/// merged, rows inside the hull of the others removed, until nothing changes.
///
/// The result is ultraweakly equivalent to `c` (both witnesses are exact) but
/// is not claimed to be a canonical representative of its class.
pub fn reduce(c: &CommMatrix) -> Result<Transformed> {
    let mut acc = Transformed::unchanged(c);
    loop {
        let cols = merge_columns(&acc.matrix)?;
        let rows = drop_hull_rows(&cols.matrix)?;
        let changed = cols.matrix != acc.matrix || rows.matrix != cols.matrix;
        if !changed {
            return Ok(acc);
        }
        acc = acc.then(&cols)?.then(&rows)?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_a, make_d};
    use crate::rational::rat;

    fn m(rows: &[&[i64]], den: i64) -> CommMatrix {
        CommMatrix::new(rows.iter().map(|r| r.iter().map(|&x| rat(x, den)).collect()).collect()).unwrap()
    }

    #[test]
    fn split_identity_column() {
        let id = make_identity(2).unwrap();
        let t = split_column(&id, 0, &[rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(t.matrix, m(&[&[1, 1, 0], &[0, 0, 2]], 2));
        assert!(t.verifies(&id));
    }

    #[test]
    fn convex_row_on_identity() {
        let id = make_identity(2).unwrap();
        let t = add_convex_row(&id, &[rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(t.matrix, m(&[&[2, 0], &[0, 2], &[1, 1]], 2));
        assert!(t.verifies(&id));
    }

    #[test]
    fn permuting_d_n1_gives_a_n() {
        let d = make_d(3, &int(1)).unwrap();
        let t = permute(&d, &[2, 1, 0], &[0, 1, 2]).unwrap();
        assert_eq!(t.matrix, make_a(3).unwrap());
        assert!(t.verifies(&d));
    }

    #[test]
    fn all_transforms_verify() {
        let c = m(&[&[2, 1, 0], &[0, 2, 1], &[1, 0, 2]], 3);
        assert!(permute(&c, &[1, 2, 0], &[2, 0, 1]).unwrap().verifies(&c));
        assert!(duplicate_row(&c, 1).unwrap().verifies(&c));
        assert!(add_zero_column(&c).unwrap().verifies(&c));
        assert!(add_convex_row(&c, &[rat(1, 4), rat(1, 4), rat(1, 2)]).unwrap().verifies(&c));
        assert!(split_column(&c, 1, &[rat(1, 3), int(0), rat(2, 3)]).unwrap().verifies(&c));
    }

    #[test]
    fn transform_errors() {
        let c = make_identity(2).unwrap();
        assert!(permute(&c, &[0, 0], &[0, 1]).is_err());
        assert!(duplicate_row(&c, 2).is_err());
        assert!(add_convex_row(&c, &[rat(1, 2), rat(1, 3)]).is_err());
        assert!(add_convex_row(&c, &[rat(3, 2), rat(-1, 2)]).is_err());
        assert!(split_column(&c, 5, &[int(1)]).is_err());
        assert!(split_column(&c, 0, &[]).is_err());
    }

    #[test]
    fn reduce_merges_and_drops() {
        let c = CommMatrix::new(vec![
            vec![rat(1, 2), rat(1, 2), int(0)],
            vec![int(0), int(0), int(1)],
            vec![rat(1, 4), rat(1, 4), rat(1, 2)],
        ])
        .unwrap();
        let r = reduce(&c).unwrap();
        assert_eq!(r.matrix, make_identity(2).unwrap());
        assert!(r.verifies(&c));
        assert_eq!(reduce(&r.matrix).unwrap().matrix, r.matrix);
    }

    #[test]
    fn reduce_keeps_reduced_matrices() {
        let id = make_identity(3).unwrap();
        assert_eq!(reduce(&id).unwrap().matrix, id);
        let d = make_d(3, &int(1)).unwrap();
        let r = reduce(&d).unwrap();
        assert_eq!(r.matrix, d);
        assert!(r.verifies(&d));
    }

    #[test]
    fn reduce_handles_zero_columns_and_duplicates() {
        let c = m(&[&[1, 0, 1], &[1, 0, 1], &[0, 0, 2]], 2);
        let r = reduce(&c).unwrap();
        assert!(r.verifies(&c));
        assert_eq!(r.matrix.shape(), (2, 2));
        assert_eq!(reduce(&r.matrix).unwrap().matrix, r.matrix);
    }
}
