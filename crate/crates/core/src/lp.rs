//! Dense two-phase simplex with Bland's rule.
//!
//! The solver is generic over the scalar type: with [`Rational`] every pivot
//! is exact, with `f64` it is a fast approximate solver used inside
//! heuristics whose output is re-verified exactly afterwards.

use std::fmt::Debug;

use num_traits::{Num, One, Signed, Zero};

use crate::rational::Rational;

pub trait LpScalar: Num + Signed + Clone + PartialOrd + Debug {
    /// Magnitudes at or below this are treated as zero.
    fn tolerance() -> Self;

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl LpScalar for Rational {
    fn tolerance() -> Self {
        Rational::zero()
    }
}

impl LpScalar for f64 {
    fn tolerance() -> Self {
        1e-10
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

/// `minimize objective·x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub n_vars: usize,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T: LpScalar> LinearProgram<T> {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![T::zero(); n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, T)>, relation: Relation, rhs: T) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).run(self)
    }
}

struct Tableau<T> {
    /// rows 0..m are constraints, row m is the objective; last column is the rhs
    cells: Vec<Vec<T>>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
    first_artificial: usize,
}

impl<T: LpScalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let m = lp.constraints.len();
        let n_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();
        let n_struct = lp.n_vars;
        let first_artificial = n_struct + n_slack;
        let n_total = first_artificial + m;
        let mut cells = vec![vec![T::zero(); n_total + 1]; m + 1];
        let mut slack = n_struct;
        for (r, con) in lp.constraints.iter().enumerate() {
            let row = &mut cells[r];
            for (j, a) in &con.coeffs {
                row[*j] = row[*j].clone() + a.clone();
            }
            match con.relation {
                Relation::Le => {
                    row[slack] = T::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -T::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[n_total] = con.rhs.clone();
            if con.rhs.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[first_artificial + r] = T::one();
        }
        Self {
            cells,
            basis: (first_artificial..first_artificial + m).collect(),
            n_struct,
            n_total,
            first_artificial,
        }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn set_objective(&mut self, costs: &[T]) {
        let m = self.m();
        let width = self.n_total + 1;
        let mut obj = vec![T::zero(); width];
        for (j, c) in costs.iter().enumerate() {
            obj[j] = c.clone();
        }
        // reduced costs relative to the current basis
        for r in 0..m {
            let cb = obj[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..width {
                let a = self.cells[r][j].clone();
                if !a.is_zero() {
                    obj[j] = obj[j].clone() - cb.clone() * a;
                }
            }
        }
        self.cells[m] = obj;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n_total + 1;
        let p = self.cells[row][col].clone();
        for j in 0..width {
            if !self.cells[row][j].is_zero() {
                self.cells[row][j] = self.cells[row][j].clone() / p.clone();
            }
        }
        let pivot_row = self.cells[row].clone();
        for r in 0..self.cells.len() {
            if r == row {
                continue;
            }
            let f = self.cells[r][col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..width {
                if !pivot_row[j].is_zero() {
                    self.cells[r][j] = self.cells[r][j].clone() - f.clone() * pivot_row[j].clone();
                }
            }
            if !T::tolerance().is_zero() {
                self.cells[r][col] = T::zero();
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: lowest-index entering column, lowest-index basic
    /// variable among tied ratios. Returns false on unboundedness.
    fn optimize(&mut self, allowed: usize) -> bool {
        let m = self.m();
        let rhs = self.n_total;
        loop {
            let Some(col) = (0..allowed).find(|&j| self.cells[m][j].is_neg()) else {
                return true;
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..m {
                let a = &self.cells[r][col];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.cells[r][rhs].clone() / a.clone();
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        let diff = ratio.clone() - bv.clone();
                        if diff.is_neg() || (diff.is_negligible() && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn run(mut self, lp: &LinearProgram<T>) -> LpOutcome<T> {
        let m = self.m();
        let mut phase1 = vec![T::zero(); self.n_total];
        for c in phase1.iter_mut().skip(self.first_artificial) {
            *c = T::one();
        }
        self.set_objective(&phase1);
        self.optimize(self.n_total);
        let infeas = -self.cells[m][self.n_total].clone();
        if infeas.is_pos() {
            return LpOutcome::Infeasible;
        }
        // drive remaining artificials out of the basis
        let mut r = 0;
        while r < self.m() {
            if self.basis[r] >= self.first_artificial {
                if let Some(col) = (0..self.first_artificial).find(|&j| !self.cells[r][j].is_negligible()) {
                    self.pivot(r, col);
                    r += 1;
                } else {
                    // redundant constraint
                    self.cells.remove(r);
                    self.basis.remove(r);
                }
            } else {
                r += 1;
            }
        }
        let mut costs = lp.objective.clone();
        costs.resize(self.n_total, T::zero());
        self.set_objective(&costs);
        if !self.optimize(self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![T::zero(); self.n_struct];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.cells[r][self.n_total].clone();
            }
        }
        let value = lp
            .objective
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
        LpOutcome::Optimal { x, value }
    }
}

/// Finds `w >= 0`, `Σ w = 1` with `Σ_k w_k points[k] = target`, exactly.
pub fn convex_combination(points: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let k = points.len();
    if k == 0 {
        return None;
    }
    let mut lp = LinearProgram::<Rational>::new(k);
    lp.add(
        (0..k).map(|i| (i, Rational::one())).collect(),
        Relation::Eq,
        Rational::one(),
    );
    for (j, t) in target.iter().enumerate() {
        let coeffs: Vec<(usize, Rational)> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| !p[j].is_zero())
            .map(|(i, p)| (i, p[j].clone()))
            .collect();
        lp.add(coeffs, Relation::Eq, t.clone());
    }
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn exact_small_lp() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6  -> (8/5, 6/5), value 14/5
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.objective = vec![int(-1), int(-1)];
        lp.add(vec![(0, int(1)), (1, int(2))], Relation::Le, int(4));
        lp.add(vec![(0, int(3)), (1, int(1))], Relation::Le, int(6));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![rat(8, 5), rat(6, 5)]);
                assert_eq!(value, rat(-14, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.add(vec![(0, int(1))], Relation::Ge, int(2));
        lp.add(vec![(0, int(1))], Relation::Le, int(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::<Rational>::new(1);
        lp.objective = vec![int(-1)];
        lp.add(vec![(0, int(1))], Relation::Ge, int(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_and_negative_rhs() {
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.objective = vec![int(1), int(0)];
        lp.add(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1));
        lp.add(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(2));
        lp.add(vec![(0, int(-1))], Relation::Le, rat(-1, 4));
        match lp.solve() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![rat(1, 4), rat(3, 4)]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_matches_exact() {
        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![-1.0, -1.0];
        lp.add(vec![(0, 1.0), (1, 2.0)], Relation::Le, 4.0);
        lp.add(vec![(0, 3.0), (1, 1.0)], Relation::Le, 6.0);
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert!((value + 2.8).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hull_membership() {
        let pts = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        let w = convex_combination(&pts, &[rat(1, 3), rat(2, 3)]).unwrap();
        assert_eq!(w, vec![rat(1, 3), rat(2, 3)]);
        assert!(convex_combination(&pts[..1], &[rat(1, 3), rat(2, 3)]).is_none());
    }
}
