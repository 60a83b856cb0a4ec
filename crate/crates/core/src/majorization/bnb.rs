//! Spatial branch and bound for `min ‖C − L·D·R‖∞` over stochastic `L`, `R`.
//!
//! Each node relaxes the bilinear terms `W_ipj = L_ip·M_pj` (with `M = D·R`)
//! by McCormick envelopes. The relaxation is solved in floating point; the
//! node's lower bound is then recomputed exactly from the returned duals,
//! which is valid for any dual vector, so pruning never depends on solver
//! accuracy.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::budget::{Budget, Deadline};
use crate::matrix::CommMatrix;
use crate::rational::{from_f64_exact, rationalize, to_f64, Rational};
use crate::transform::StochasticPair;

use super::search::exactify;
use super::verdict::{Certificate, Outcome, Verdict};

const BATCH: usize = 8;

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<(usize, Rational)>,
    rhs: Rational,
}

/// Variable layout and the box-independent constraints.
struct Formulation {
    a: usize,
    b: usize,
    dr: usize,
    dc: usize,
    n: usize,
    eq: Vec<Row>,
    ineq: Vec<Row>,
    d: CommMatrix,
}

#[derive(Clone, Debug, PartialEq)]
struct Bounds {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

impl Formulation {
    fn l(&self, i: usize, p: usize) -> usize {
        i * self.dr + p
    }
    fn r(&self, q: usize, j: usize) -> usize {
        self.a * self.dr + q * self.b + j
    }
    fn m(&self, p: usize, j: usize) -> usize {
        self.a * self.dr + self.dc * self.b + p * self.b + j
    }
    fn w(&self, i: usize, p: usize, j: usize) -> usize {
        self.a * self.dr + self.dc * self.b + self.dr * self.b + (i * self.dr + p) * self.b + j
    }
    fn t(&self) -> usize {
        self.n - 1
    }

    fn new(c: &CommMatrix, d: &CommMatrix) -> Self {
        let (a, b) = c.shape();
        let (dr, dc) = d.shape();
        let n = a * dr + dc * b + dr * b + a * dr * b + 1;
        let mut f = Formulation {
            a,
            b,
            dr,
            dc,
            n,
            eq: Vec::new(),
            ineq: Vec::new(),
            d: d.clone(),
        };
        let one = Rational::one;
        for i in 0..a {
            let coeffs = (0..dr).map(|p| (f.l(i, p), one())).collect();
            f.eq.push(Row { coeffs, rhs: one() });
        }
        for q in 0..dc {
            let coeffs = (0..b).map(|j| (f.r(q, j), one())).collect();
            f.eq.push(Row { coeffs, rhs: one() });
        }
        for p in 0..dr {
            for j in 0..b {
                let mut coeffs = vec![(f.m(p, j), one())];
                coeffs.extend((0..dc).filter(|&q| !d.get(p, q).is_zero()).map(|q| (f.r(q, j), -d.get(p, q).clone())));
                f.eq.push(Row {
                    coeffs,
                    rhs: Rational::zero(),
                });
            }
        }
        for i in 0..a {
            for p in 0..dr {
                let mut coeffs: Vec<_> = (0..b).map(|j| (f.w(i, p, j), one())).collect();
                coeffs.push((f.l(i, p), -one()));
                f.eq.push(Row {
                    coeffs,
                    rhs: Rational::zero(),
                });
            }
        }
        for i in 0..a {
            for j in 0..b {
                let sum: Vec<_> = (0..dr).map(|p| (f.w(i, p, j), one())).collect();
                let mut up = sum.clone();
                up.push((f.t(), -one()));
                f.ineq.push(Row {
                    coeffs: up,
                    rhs: c.get(i, j).clone(),
                });
                let mut down: Vec<_> = sum.into_iter().map(|(k, v)| (k, -v)).collect();
                down.push((f.t(), -one()));
                f.ineq.push(Row {
                    coeffs: down,
                    rhs: -c.get(i, j).clone(),
                });
            }
        }
        if d.is_identity() {
            // columns of L and rows of R can be permuted together
            for p in 0..dr.saturating_sub(1) {
                f.ineq.push(Row {
                    coeffs: vec![(f.m(p + 1, 0), one()), (f.m(p, 0), -one())],
                    rhs: Rational::zero(),
                });
            }
        }
        f
    }

    fn root(&self) -> Bounds {
        Bounds {
            lo: vec![Rational::zero(); self.n],
            hi: vec![Rational::one(); self.n],
        }
    }

    fn tighten_rows(&self, bx: &mut Bounds, groups: &[Vec<usize>]) -> bool {
        for g in groups {
            let s_lo: Rational = g.iter().map(|&k| &bx.lo[k]).sum();
            let s_hi: Rational = g.iter().map(|&k| &bx.hi[k]).sum();
            if s_lo > Rational::one() || s_hi < Rational::one() {
                return false;
            }
            for &k in g {
                let up = Rational::one() - (&s_lo - &bx.lo[k]);
                let down = Rational::one() - (&s_hi - &bx.hi[k]);
                if up < bx.hi[k] {
                    bx.hi[k] = up;
                }
                if down > bx.lo[k] {
                    bx.lo[k] = down;
                }
            }
        }
        true
    }

    /// Bound propagation; `None` if the box holds no feasible point.
    fn propagate(&self, mut bx: Bounds) -> Option<Bounds> {
        let l_rows: Vec<Vec<usize>> = (0..self.a).map(|i| (0..self.dr).map(|p| self.l(i, p)).collect()).collect();
        let r_rows: Vec<Vec<usize>> = (0..self.dc).map(|q| (0..self.b).map(|j| self.r(q, j)).collect()).collect();
        for _ in 0..2 {
            if !self.tighten_rows(&mut bx, &l_rows) || !self.tighten_rows(&mut bx, &r_rows) {
                return None;
            }
            for p in 0..self.dr {
                for j in 0..self.b {
                    let k = self.m(p, j);
                    let (mut lo, mut hi) = (Rational::zero(), Rational::zero());
                    for q in 0..self.dc {
                        let dpq = self.d.get(p, q);
                        if !dpq.is_zero() {
                            lo += dpq * &bx.lo[self.r(q, j)];
                            hi += dpq * &bx.hi[self.r(q, j)];
                        }
                    }
                    if lo > bx.lo[k] {
                        bx.lo[k] = lo;
                    }
                    if hi < bx.hi[k] {
                        bx.hi[k] = hi;
                    }
                }
            }
            for i in 0..self.a {
                for p in 0..self.dr {
                    for j in 0..self.b {
                        let (l, m, w) = (self.l(i, p), self.m(p, j), self.w(i, p, j));
                        let lo = &bx.lo[l] * &bx.lo[m];
                        let hi = &bx.hi[l] * &bx.hi[m];
                        if lo > bx.lo[w] {
                            bx.lo[w] = lo;
                        }
                        if hi < bx.hi[w] {
                            bx.hi[w] = hi;
                        }
                    }
                }
            }
            if (0..self.n).any(|k| bx.lo[k] > bx.hi[k]) {
                return None;
            }
        }
        Some(bx)
    }

    fn mccormick(&self, bx: &Bounds) -> Vec<Row> {
        let mut rows = Vec::with_capacity(4 * self.a * self.dr * self.b);
        for i in 0..self.a {
            for p in 0..self.dr {
                for j in 0..self.b {
                    let (l, m, w) = (self.l(i, p), self.m(p, j), self.w(i, p, j));
                    let (ll, ul, lm, um) = (&bx.lo[l], &bx.hi[l], &bx.lo[m], &bx.hi[m]);
                    let one = Rational::one;
                    rows.push(Row {
                        coeffs: vec![(m, ll.clone()), (l, lm.clone()), (w, -one())],
                        rhs: ll * lm,
                    });
                    rows.push(Row {
                        coeffs: vec![(m, ul.clone()), (l, um.clone()), (w, -one())],
                        rhs: ul * um,
                    });
                    rows.push(Row {
                        coeffs: vec![(w, one()), (m, -ul.clone()), (l, -lm.clone())],
                        rhs: -(ul * lm),
                    });
                    rows.push(Row {
                        coeffs: vec![(w, one()), (m, -ll.clone()), (l, -um.clone())],
                        rhs: -(ll * um),
                    });
                }
            }
        }
        rows
    }

    /// Solves the node relaxation and returns the primal point, duals and status.
    fn relax(&self, bx: &Bounds, extra: &[Row]) -> Option<(Vec<f64>, Vec<f64>, SolverStatus)> {
        let n_eq = self.eq.len();
        let inequalities: Vec<&Row> = self.ineq.iter().chain(extra).collect();
        let n_in = inequalities.len() + 2 * self.n;
        let (mut ri, mut ci, mut vals, mut rhs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (r, row) in self.eq.iter().chain(inequalities.iter().copied()).enumerate() {
            for (k, v) in &row.coeffs {
                ri.push(r);
                ci.push(*k);
                vals.push(to_f64(v));
            }
            rhs.push(to_f64(&row.rhs));
        }
        let base = n_eq + inequalities.len();
        for k in 0..self.n {
            ri.push(base + 2 * k);
            ci.push(k);
            vals.push(1.0);
            rhs.push(to_f64(&bx.hi[k]));
            ri.push(base + 2 * k + 1);
            ci.push(k);
            vals.push(-1.0);
            rhs.push(-to_f64(&bx.lo[k]));
        }
        let a = CscMatrix::new_from_triplets(n_eq + n_in, self.n, ri, ci, vals);
        let p = CscMatrix::zeros((self.n, self.n));
        let mut q = vec![0.0; self.n];
        q[self.t()] = 1.0;
        let cones = [SupportedConeT::ZeroConeT(n_eq), SupportedConeT::NonnegativeConeT(n_in)];
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .presolve_enable(false)
            .max_iter(200)
            .build()
            .ok()?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &rhs, &cones, settings).ok()?;
        solver.solve();
        let sol = &solver.solution;
        Some((sol.x.clone(), sol.z.clone(), sol.status))
    }

    /// `-bᵀz + Σ_k min(g_k lo_k, g_k hi_k)` with `g = c + Aᵀz`, in exact
    /// arithmetic, for the rows excluding the box. Valid for any `z` whose
    /// inequality part is nonnegative (negative entries are clipped).
    fn dual_bound(&self, bx: &Bounds, extra: &[Row], z: &[f64], objective: bool) -> Rational {
        let n_eq = self.eq.len();
        let mut g = vec![Rational::zero(); self.n];
        if objective {
            g[self.t()] = Rational::one();
        }
        let mut value = Rational::zero();
        for (r, row) in self.eq.iter().chain(&self.ineq).chain(extra).enumerate() {
            let mut zr = z.get(r).copied().unwrap_or(0.0);
            if r >= n_eq && zr < 0.0 {
                zr = 0.0;
            }
            if zr.abs() < 1e-13 || !zr.is_finite() {
                continue;
            }
            let zr = from_f64_exact(zr);
            for (k, v) in &row.coeffs {
                g[*k] += &zr * v;
            }
            value -= &zr * &row.rhs;
        }
        for (k, gk) in g.iter().enumerate() {
            if gk.is_positive() {
                value += gk * &bx.lo[k];
            } else if gk.is_negative() {
                value += gk * &bx.hi[k];
            }
        }
        value
    }
}

/// Leaf verdicts stored in the tree.
#[derive(Clone, Debug, PartialEq)]
pub enum LeafBound {
    /// Bound propagation emptied the box.
    Empty,
    /// Farkas-type certificate that the relaxation is infeasible.
    Infeasible,
    /// Certified positive lower bound on the residual.
    Bound(Rational),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    /// Child on the `≥ split` side of the parent's split.
    pub upper: bool,
    pub split: Option<(usize, Rational)>,
    pub leaf: Option<LeafBound>,
}

/// Split structure of a finished search; enough to recompute every leaf bound.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SearchTree {
    pub nodes: Vec<TreeNode>,
}

impl SearchTree {
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.leaf.is_some()).count()
    }

    fn node_box(&self, f: &Formulation, id: usize) -> Bounds {
        let mut path = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.nodes[cur].parent {
            path.push((parent, self.nodes[cur].upper));
            cur = parent;
        }
        let mut bx = f.root();
        for (parent, upper) in path.into_iter().rev() {
            let (k, at) = self.nodes[parent].split.clone().expect("inner node has a split");
            if upper {
                if at > bx.lo[k] {
                    bx.lo[k] = at;
                }
            } else if at < bx.hi[k] {
                bx.hi[k] = at;
            }
        }
        bx
    }

    /// Recomputes every leaf; returns the smallest residual bound if the tree
    /// is complete and every leaf is pruned.
    pub fn replay(&self, c: &CommMatrix, d: &CommMatrix) -> Option<Rational> {
        if self.nodes.is_empty() || self.nodes[0].parent.is_some() {
            return None;
        }
        let f = Formulation::new(c, d);
        let mut children = vec![(0usize, 0usize); self.nodes.len()];
        for n in &self.nodes[1..] {
            let p = n.parent?;
            if p >= self.nodes.len() || self.nodes[p].split.is_none() {
                return None;
            }
            if n.upper {
                children[p].1 += 1;
            } else {
                children[p].0 += 1;
            }
        }
        let mut best: Option<Rational> = None;
        for (id, node) in self.nodes.iter().enumerate() {
            match (&node.split, &node.leaf) {
                (Some((k, _)), None) => {
                    if children[id] != (1, 1) || *k >= f.n {
                        return None;
                    }
                }
                (None, Some(leaf)) => {
                    let bx = f.propagate(self.node_box(&f, id));
                    let check = match (leaf, bx) {
                        (LeafBound::Empty, None) => None,
                        (_, None) => return None,
                        (LeafBound::Empty, Some(_)) => return None,
                        (_, Some(bx)) => Some(evaluate(&f, &bx)?),
                    };
                    match (leaf, check) {
                        (LeafBound::Empty, _) => {}
                        (LeafBound::Infeasible, Some(Evaluation::Infeasible)) => {}
                        (LeafBound::Bound(b), Some(Evaluation::Bound(x))) if x.is_positive() && x >= *b => {
                            if best.as_ref().is_none_or(|cur| x < *cur) {
                                best = Some(x);
                            }
                        }
                        _ => return None,
                    }
                }
                _ => return None,
            }
        }
        Some(best.unwrap_or_else(Rational::one))
    }
}

enum Evaluation {
    Infeasible,
    Bound(Rational),
}

/// Leaf check used both during the search and on replay.
fn evaluate(f: &Formulation, bx: &Bounds) -> Option<Evaluation> {
    let extra = f.mccormick(bx);
    let (_, z, status) = f.relax(bx, &extra)?;
    if matches!(status, SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible)
        && f.dual_bound(bx, &extra, &z, false).is_positive()
    {
        return Some(Evaluation::Infeasible);
    }
    Some(Evaluation::Bound(f.dual_bound(bx, &extra, &z, true)))
}

enum NodeResult {
    Leaf(LeafBound),
    Split {
        var: usize,
        at: Rational,
        bound: f64,
        witness: Option<StochasticPair>,
        residual: f64,
    },
}

fn split_point(lo: &Rational, hi: &Rational, x: f64) -> Rational {
    let (l, h) = (to_f64(lo), to_f64(hi));
    let w = h - l;
    let target = x.clamp(l + w / 4.0, h - w / 4.0);
    let s = rationalize(target, 10_000);
    if s > *lo && s < *hi {
        s
    } else {
        (lo + hi) / Rational::from_integer(2.into())
    }
}

fn process(f: &Formulation, c: &CommMatrix, bx: Bounds) -> NodeResult {
    let Some(bx) = f.propagate(bx) else {
        return NodeResult::Leaf(LeafBound::Empty);
    };
    let extra = f.mccormick(&bx);
    let relaxed = f.relax(&bx, &extra);
    let widest = || {
        (0..f.n - 1)
            .max_by(|&x, &y| {
                let wx = &bx.hi[x] - &bx.lo[x];
                let wy = &bx.hi[y] - &bx.lo[y];
                wx.cmp(&wy).then(y.cmp(&x))
            })
            .expect("at least one variable")
    };
    let Some((x, z, status)) = relaxed else {
        let k = widest();
        return NodeResult::Split {
            var: k,
            at: (&bx.lo[k] + &bx.hi[k]) / Rational::from_integer(2.into()),
            bound: 0.0,
            witness: None,
            residual: f64::INFINITY,
        };
    };
    if matches!(status, SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible)
        && f.dual_bound(&bx, &extra, &z, false).is_positive()
    {
        return NodeResult::Leaf(LeafBound::Infeasible);
    }
    let bound = f.dual_bound(&bx, &extra, &z, true);
    if bound.is_positive() {
        return NodeResult::Leaf(LeafBound::Bound(bound));
    }
    let solved = matches!(status, SolverStatus::Solved | SolverStatus::AlmostSolved);
    let (mut best_gap, mut pick) = (-1.0, None);
    if solved {
        for i in 0..f.a {
            for p in 0..f.dr {
                for j in 0..f.b {
                    let (l, m, w) = (f.l(i, p), f.m(p, j), f.w(i, p, j));
                    let gap = (x[w] - x[l] * x[m]).abs();
                    if gap > best_gap {
                        best_gap = gap;
                        pick = Some((l, m));
                    }
                }
            }
        }
    }
    // candidate from the relaxation point
    let mut witness = None;
    let mut residual = f64::INFINITY;
    if solved {
        let left: Vec<Vec<f64>> = (0..f.a).map(|i| (0..f.dr).map(|p| x[f.l(i, p)].max(0.0)).collect()).collect();
        let right: Vec<Vec<f64>> = (0..f.dc).map(|q| (0..f.b).map(|j| x[f.r(q, j)].max(0.0)).collect()).collect();
        let norm = |m: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.into_iter()
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    r.into_iter().map(|v| v / s.max(1e-300)).collect()
                })
                .collect()
        };
        let (left, right) = (norm(left), norm(right));
        residual = super::search::residual(&c.to_f64(), &f.d.to_f64(), &left, &right);
        if residual < 1e-8 {
            witness = exactify(c, &f.d, &left, &right);
        }
    }
    let var = match pick {
        Some((l, m)) if best_gap > 1e-12 => {
            let wl = &bx.hi[l] - &bx.lo[l];
            let wm = &bx.hi[m] - &bx.lo[m];
            if wm > wl {
                m
            } else {
                l
            }
        }
        _ => widest(),
    };
    let at = split_point(&bx.lo[var], &bx.hi[var], x.get(var).copied().unwrap_or(0.5));
    NodeResult::Split {
        var,
        at,
        bound: x.get(f.t()).copied().unwrap_or(0.0).max(0.0),
        witness,
        residual,
    }
}

#[derive(PartialEq)]
struct Open {
    bound: f64,
    id: usize,
    bx: Bounds,
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // max-heap: smallest bound first, then smallest id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.id.cmp(&self.id))
    }
}

/// `rows(L)·(c−1) + rows(R)·(b−1)` for `C` (a×b) against `D` (c×d).
pub fn free_dims(c: &CommMatrix, d: &CommMatrix) -> usize {
    c.n_rows() * (d.n_rows() - 1) + d.n_cols() * (c.n_cols() - 1)
}

/// Branch and bound on `C ⪯ D`.
pub fn decide_certified(c: &CommMatrix, d: &CommMatrix, budget: &Budget) -> Verdict {
    let started = Instant::now();
    let deadline = Deadline::after(budget.time);
    let f = Formulation::new(c, d);
    let mut tree = SearchTree {
        nodes: vec![TreeNode {
            parent: None,
            upper: false,
            split: None,
            leaf: None,
        }],
    };
    let mut heap = BinaryHeap::new();
    heap.push(Open {
        bound: 0.0,
        id: 0,
        bx: f.root(),
    });
    let mut processed = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut min_leaf: Option<Rational> = None;
    while !heap.is_empty() {
        if deadline.expired() || processed >= budget.bb_nodes {
            let mut v = Verdict::unknown(best_residual.is_finite().then_some(best_residual));
            v.nodes = processed;
            v.stage = "branch-and-bound";
            v.lower_bound = Some(Rational::zero());
            v.elapsed = started.elapsed();
            return v;
        }
        let batch: Vec<Open> = (0..BATCH).map_while(|_| heap.pop()).collect();
        let results: Vec<NodeResult> = batch.par_iter().map(|o| process(&f, c, o.bx.clone())).collect();
        processed += batch.len();
        for (open, result) in batch.into_iter().zip(results) {
            match result {
                NodeResult::Leaf(leaf) => {
                    if let LeafBound::Bound(b) = &leaf {
                        if min_leaf.as_ref().is_none_or(|m| b < m) {
                            min_leaf = Some(b.clone());
                        }
                    }
                    tree.nodes[open.id].leaf = Some(leaf);
                }
                NodeResult::Split {
                    var,
                    at,
                    bound,
                    witness,
                    residual,
                } => {
                    best_residual = best_residual.min(residual);
                    if let Some(w) = witness {
                        let mut v = Verdict::majorizes(w.clone(), Certificate::ExactWitness(w), "branch-and-bound");
                        v.nodes = processed;
                        v.elapsed = started.elapsed();
                        return v;
                    }
                    tree.nodes[open.id].split = Some((var, at.clone()));
                    for upper in [false, true] {
                        let mut bx = open.bx.clone();
                        if upper {
                            bx.lo[var] = at.clone();
                        } else {
                            bx.hi[var] = at.clone();
                        }
                        let id = tree.nodes.len();
                        tree.nodes.push(TreeNode {
                            parent: Some(open.id),
                            upper,
                            split: None,
                            leaf: None,
                        });
                        heap.push(Open { bound, id, bx });
                    }
                }
            }
        }
    }
    let bound = min_leaf.unwrap_or_else(Rational::one);
    let mut v = Verdict::refuted(
        Certificate::BranchBoundBound {
            bound: bound.clone(),
            nodes: processed,
            tree: Some(tree),
        },
        "branch-and-bound",
    );
    v.outcome = Outcome::NotMajorizes;
    v.nodes = processed;
    v.lower_bound = Some(bound);
    v.residual = best_residual.is_finite().then_some(best_residual);
    v.elapsed = started.elapsed();
    v
}
