#![allow(dead_code)]

use commtask_core::rational::rat;
use commtask_core::CommMatrix;
use rand::Rng;

/// Random row-stochastic matrix with small denominators; each entry is zero
/// with probability `zeros`.
pub fn random_stochastic(rng: &mut impl Rng, rows: usize, cols: usize, zeros: f64) -> CommMatrix {
    let data = (0..rows)
        .map(|_| {
            let mut w: Vec<i64> = (0..cols)
                .map(|_| if rng.gen_bool(zeros) { 0 } else { rng.gen_range(1..=4) })
                .collect();
            if w.iter().all(|&x| x == 0) {
                w[rng.gen_range(0..cols)] = 1;
            }
            let total: i64 = w.iter().sum();
            w.into_iter().map(|x| rat(x, total)).collect()
        })
        .collect();
    CommMatrix::new(data).expect("rows sum to one")
}

/// Largest set of pairwise orthogonal rows by exhaustive subset search.
pub fn brute_force_iota(c: &CommMatrix) -> usize {
    let n = c.n_rows();
    let orthogonal = |a: usize, b: usize| (0..c.n_cols()).all(|j| c.get(a, j) == &rat(0, 1) || c.get(b, j) == &rat(0, 1));
    (1u32..1 << n)
        .filter(|mask| {
            let rows: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            rows.iter().enumerate().all(|(k, &a)| rows[k + 1..].iter().all(|&b| orthogonal(a, b)))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}
