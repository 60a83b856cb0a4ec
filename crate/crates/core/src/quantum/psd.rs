//! Two-sided bounds on the psd rank and the qubit screen.

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::matrix::CommMatrix;
use crate::monotones::{lambda_max, nneg_rank, nneg_rank_bounds, rank, rank_of_rows, NnegRank};
use crate::rational::{ceil, ceil_sqrt, int, Rational};

use super::factor::factorize;
use super::library::{witness_library, LIBRARY_TOL};
use super::model::{is_psd_exact, verify_model, QuantumModel};

#[derive(Clone, Debug, PartialEq)]
pub struct NumericWitness {
    pub model: QuantumModel,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsdBounds {
    pub lower: usize,
    pub upper: usize,
    /// Upper bound backed by an exact or library witness.
    pub certified_upper: usize,
    pub lambda_max_bound: Rational,
    pub methods: Vec<String>,
    /// Set when `upper < certified_upper`; not a proof.
    pub numeric_witness: Option<NumericWitness>,
}

impl PsdBounds {
    pub fn exact(&self) -> Option<usize> {
        (self.lower == self.upper && self.upper == self.certified_upper).then_some(self.lower)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": self.lower,
            "hi": self.upper,
            "certified_hi": self.certified_upper,
            "lambda_max": self.lambda_max_bound.to_string(),
            "methods": self.methods,
            "numeric_witness": self.numeric_witness.as_ref().map(|w| json!({
                "model": w.model.to_json(),
                "residual": w.residual,
                "certified": false,
            })),
        })
    }
}

fn distinct_rows(c: &CommMatrix) -> bool {
    (0..c.n_rows()).all(|a| (a + 1..c.n_rows()).all(|b| c.row(a) != c.row(b)))
}

/// All rows distinct and some column with at least two zeros and a nonzero
/// entry: no qubit effect can vanish on two distinct states.
pub fn kernel_rule(c: &CommMatrix) -> bool {
    distinct_rows(c)
        && (0..c.n_cols()).any(|j| {
            let col = c.column(j);
            let zeros = col.iter().filter(|x| x.is_zero()).count();
            zeros >= 2 && zeros < col.len()
        })
}

/// For square `C` with trace 2 and no zero column a qubit model must use
/// pure states and rank-one effects `M_b = C_bb P_b`, with `ρ_b = P_b`.
/// Then `G_ab = 2 C_ab / C_bb - 1` is the Gram matrix of unit Bloch vectors
/// `v_b` with `Σ_b C_bb v_b = 0`. Returns true when that is impossible.
pub fn trace_saturation_rule(c: &CommMatrix) -> bool {
    if !c.is_square() || c.trace() != int(2) {
        return false;
    }
    let n = c.n_rows();
    if (0..n).any(|b| c.get(b, b).is_zero()) {
        return false;
    }
    let g: Vec<Vec<Rational>> = (0..n)
        .map(|a| (0..n).map(|b| int(2) * c.get(a, b) / c.get(b, b) - int(1)).collect())
        .collect();
    let symmetric = (0..n).all(|a| (a + 1..n).all(|b| g[a][b] == g[b][a]));
    if !symmetric || !is_psd_exact(&g) || rank_of_rows(&g) > 3 {
        return true;
    }
    let r: Vec<Rational> = (0..n).map(|b| c.get(b, b).clone()).collect();
    let mut form = Rational::zero();
    for a in 0..n {
        for b in 0..n {
            form += &r[a] * &g[a][b] * &r[b];
        }
    }
    !form.is_zero()
}

/// `max(⌈√rank⌉, ⌈λ_max⌉, 3 if a qubit obstruction fires)` with the rules used.
pub fn psd_lower(c: &CommMatrix) -> (usize, Vec<String>) {
    let mut rules = vec![
        (ceil_sqrt(rank(c)), "sqrt-rank"),
        (ceil(&lambda_max(c)).try_into().unwrap_or(usize::MAX), "lambda-max"),
    ];
    if kernel_rule(c) {
        rules.push((3, "kernel"));
    }
    if trace_saturation_rule(c) {
        rules.push((3, "trace-saturation"));
    }
    let best = rules.iter().map(|r| r.0).max().unwrap_or(1).max(1);
    let tags = rules
        .iter()
        .filter(|r| r.0 == best && best > 1)
        .map(|r| r.1.to_string())
        .collect();
    (best, tags)
}

/// Rows, columns and scale of an embedding `t·D = C[rows, cols]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub t: Rational,
}

fn injections(k: usize, m: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for j in 0..m {
        if !cur.contains(&j) {
            cur.push(j);
            injections(k, m, out, cur);
            cur.pop();
        }
    }
}

fn augment(i: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
    for &r in &adj[i] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if owner[r].is_none_or(|o| augment(o, adj, seen, owner)) {
            owner[r] = Some(i);
            return true;
        }
    }
    false
}

/// Finds `t > 0`, distinct rows and distinct columns with `t·D = C[rows, cols]`.
pub fn scaled_submatrix(d: &CommMatrix, c: &CommMatrix) -> Option<Embedding> {
    let (a, b) = d.shape();
    if a > c.n_rows() || b > c.n_cols() || c.n_cols() > 8 {
        return None;
    }
    let mut maps = Vec::new();
    injections(b, c.n_cols(), &mut maps, &mut Vec::new());
    let j0 = (0..b).find(|&j| !d.get(0, j).is_zero())?;
    for cols in maps {
        let restricted: Vec<Vec<&Rational>> = (0..c.n_rows())
            .map(|r| cols.iter().map(|&j| c.get(r, j)).collect())
            .collect();
        let mut scales: Vec<Rational> = restricted
            .iter()
            .map(|row| row[j0] / d.get(0, j0))
            .filter(|t| t.is_positive())
            .collect();
        scales.sort();
        scales.dedup();
        for t in scales {
            let adj: Vec<Vec<usize>> = (0..a)
                .map(|i| {
                    (0..c.n_rows())
                        .filter(|&r| (0..b).all(|j| *restricted[r][j] == &t * d.get(i, j)))
                        .collect()
                })
                .collect();
            if adj.iter().any(Vec::is_empty) {
                continue;
            }
            let mut owner = vec![None; c.n_rows()];
            let matched = (0..a).all(|i| augment(i, &adj, &mut vec![false; c.n_rows()], &mut owner));
            if matched {
                let mut rows = vec![0; a];
                for (r, o) in owner.iter().enumerate() {
                    if let Some(i) = o {
                        rows[*i] = r;
                    }
                }
                return Some(Embedding { rows, cols, t });
            }
        }
    }
    None
}

/// Smallest library dimension whose target contains a scaled copy of `c`.
pub fn library_bound(c: &CommMatrix) -> Option<(usize, &'static str)> {
    witness_library()
        .into_iter()
        .filter(|e| scaled_submatrix(c, &e.target).is_some())
        .filter(|e| verify_model(&e.model, &e.target, LIBRARY_TOL).is_ok_and(|(ok, _)| ok))
        .map(|e| (e.model.dim, e.name))
        .min()
}

/// Upper bound from the nonnegative rank bound and the witness library.
pub fn psd_upper_certified(c: &CommMatrix, nneg_hi: usize) -> (usize, Vec<String>) {
    let mut best = (nneg_hi, vec!["nneg-rank".to_string()]);
    if let Some((dim, name)) = library_bound(c) {
        if dim < best.0 {
            best = (dim, vec![format!("library:{name}")]);
        } else if dim == best.0 {
            best.1.push(format!("library:{name}"));
        }
    }
    best
}

/// Certified upper bound, improved by the factorization heuristic for
/// dimensions between `lower` and it.
pub fn psd_upper(c: &CommMatrix, budget: &Budget) -> (usize, Option<NumericWitness>) {
    let nneg = nneg_rank_bounds(c);
    let (lower, _) = psd_lower(c);
    let (certified, _) = psd_upper_certified(c, nneg.hi);
    heuristic_upper(c, lower, certified, budget)
}

fn heuristic_upper(c: &CommMatrix, lower: usize, certified: usize, budget: &Budget) -> (usize, Option<NumericWitness>) {
    let target = c.to_f64();
    for k in lower..certified {
        let Some(f) = factorize(&target, k, budget.psd_starts, budget.seed, budget.tol) else {
            continue;
        };
        let Some(model) = f.to_model() else {
            continue;
        };
        let residual = model
            .eval()
            .map(|ev| c.max_abs_diff(&ev.values))
            .unwrap_or(f64::INFINITY);
        if residual < budget.tol * 10.0 {
            return (model.dim, Some(NumericWitness { model, residual }));
        }
    }
    (certified, None)
}

/// Both psd bounds given the nonnegative rank.
pub fn psd_bounds(c: &CommMatrix, nneg: &NnegRank, budget: &Budget) -> PsdBounds {
    let (lower, mut methods) = psd_lower(c);
    let (certified, upper_tags) = psd_upper_certified(c, nneg.hi);
    methods.extend(upper_tags.into_iter().map(|t| format!("upper:{t}")));
    let (upper, numeric_witness) = if lower < certified {
        heuristic_upper(c, lower, certified, budget)
    } else {
        (certified, None)
    };
    if numeric_witness.is_some() {
        methods.push("upper:heuristic (non-certified)".into());
    }
    PsdBounds {
        lower,
        upper,
        certified_upper: certified,
        lambda_max_bound: lambda_max(c),
        methods,
        numeric_witness,
    }
}

/// The rule proving `C` has no qubit model, if one applies.
pub fn qubit_screen(c: &CommMatrix) -> Option<String> {
    if lambda_max(c) > int(2) {
        return Some("lambda-max > 2".into());
    }
    if c.is_square() && c.trace() > int(2) {
        return Some("trace > 2".into());
    }
    let (lower, tags) = psd_lower(c);
    (lower >= 3).then(|| format!("psd lower bound 3 ({})", tags.join(", ")))
}

/// `rank_psd(D) <= psd_upper(C)` when a scaled copy of `D` sits inside `C`.
pub fn scaled_submatrix_bound(d: &CommMatrix, c: &CommMatrix, budget: &Budget) -> Option<usize> {
    scaled_submatrix(d, c)?;
    Some(psd_upper(c, budget).0)
}

/// Minimal classical dimension.
pub fn classical_dim(c: &CommMatrix, budget: &Budget) -> NnegRank {
    nneg_rank(c, budget)
}

/// `(lower, upper)` on the minimal quantum dimension.
pub fn quantum_dim_bounds(c: &CommMatrix, budget: &Budget) -> (usize, usize) {
    let b = psd_bounds(c, &nneg_rank(c, budget), budget);
    (b.lower, b.upper)
}
