//! Numerical PSD factorization `C_ij ≈ tr(A_i B_j)` with `k×k` Gram factors.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{Complex, QuantumModel};

#[derive(Clone, Debug)]
pub struct Factorization {
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    /// `max |tr(A_i B_j) - C_ij|`.
    pub residual: f64,
}

struct Problem<'a> {
    c: &'a [Vec<f64>],
    n: usize,
    m: usize,
    k: usize,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        (self.n + self.m) * self.k * self.k
    }

    fn block(&self, theta: &[f64], idx: usize) -> DMatrix<f64> {
        let kk = self.k * self.k;
        DMatrix::from_column_slice(self.k, self.k, &theta[idx * kk..(idx + 1) * kk])
    }

    fn grams(&self, theta: &[f64]) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
        let p: Vec<_> = (0..self.n).map(|i| self.block(theta, i)).collect();
        let q: Vec<_> = (0..self.m).map(|j| self.block(theta, self.n + j)).collect();
        let a = p.iter().map(|x| x * x.transpose()).collect();
        let b = q.iter().map(|x| x * x.transpose()).collect();
        (p, q, a, b)
    }

    fn residuals(&self, a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n * self.m, 1, |r, _| {
            let (i, j) = (r / self.m, r % self.m);
            a[i].dot(&b[j]) - self.c[i][j]
        })
    }

    fn jacobian(&self, p: &[DMatrix<f64>], q: &[DMatrix<f64>], a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> DMatrix<f64> {
        let kk = self.k * self.k;
        let mut jac = DMatrix::zeros(self.n * self.m, self.n_params());
        for i in 0..self.n {
            for j in 0..self.m {
                let r = i * self.m + j;
                let dp = 2.0 * &b[j] * &p[i];
                let dq = 2.0 * &a[i] * &q[j];
                for (t, v) in dp.iter().enumerate() {
                    jac[(r, i * kk + t)] = *v;
                }
                for (t, v) in dq.iter().enumerate() {
                    jac[(r, (self.n + j) * kk + t)] = *v;
                }
            }
        }
        jac
    }

    /// Levenberg–Marquardt on all factors jointly.
    fn solve(&self, mut theta: Vec<f64>, iters: usize, tol: f64) -> (Vec<f64>, f64) {
        let (mut p, mut q, mut a, mut b) = self.grams(&theta);
        let mut r = self.residuals(&a, &b);
        let mut cost = r.norm_squared();
        let mut mu = 1e-3;
        for _ in 0..iters {
            if r.amax() < tol * 0.1 {
                break;
            }
            let jac = self.jacobian(&p, &q, &a, &b);
            let mut jjt = &jac * jac.transpose();
            for d in 0..jjt.nrows() {
                jjt[(d, d)] += mu;
            }
            let Some(y) = jjt.cholesky().map(|ch| ch.solve(&r)) else {
                mu *= 10.0;
                continue;
            };
            let step = jac.transpose() * y;
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t - s).collect();
            let (tp, tq, ta, tb) = self.grams(&trial);
            let tr = self.residuals(&ta, &tb);
            let tcost = tr.norm_squared();
            if tcost < cost {
                theta = trial;
                (p, q, a, b, r, cost) = (tp, tq, ta, tb, tr, tcost);
                mu = (mu / 3.0).max(1e-15);
            } else {
                mu *= 4.0;
                if mu > 1e12 {
                    break;
                }
            }
        }
        (theta, r.amax())
    }
}

/// Best of `starts` seeded LM runs for `k×k` factors; `None` unless the
/// residual falls below `tol`.
pub fn factorize(c: &[Vec<f64>], k: usize, starts: usize, seed: u64, tol: f64) -> Option<Factorization> {
    let n = c.len();
    let m = c.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || k == 0 {
        return None;
    }
    let problem = Problem { c, n, m, k };
    let scale = (1.0 / (m as f64 * (k as f64).powi(3))).powf(0.25);
    (0..starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let theta: Vec<f64> = (0..problem.n_params()).map(|_| rng.gen_range(-1.0..1.0) * scale * 2.0).collect();
            problem.solve(theta, 400, tol)
        })
        .find_first(|(_, res)| *res < tol)
        .map(|(theta, residual)| {
            let (_, _, a, b) = problem.grams(&theta);
            Factorization { a, b, residual }
        })
}

impl Factorization {
    /// Normalizes by `S = Σ_j B_j` on its support: `E_j = S^{-1/2} B_j S^{-1/2}`,
    /// `ρ_i = S^{1/2} A_i S^{1/2}`.
    pub fn to_model(&self) -> Option<QuantumModel> {
        let k = self.a.first()?.nrows();
        let s = self.b.iter().fold(DMatrix::zeros(k, k), |acc, b| acc + b);
        let eig = SymmetricEigen::new(s);
        let top = eig.eigenvalues.amax();
        let keep: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] > 1e-10 * top.max(1e-300)).collect();
        if keep.is_empty() {
            return None;
        }
        let r = keep.len();
        let u = DMatrix::from_fn(k, r, |i, c| eig.eigenvectors[(i, keep[c])]);
        let root = DMatrix::from_fn(r, r, |i, j| if i == j { eig.eigenvalues[keep[i]].sqrt() } else { 0.0 });
        let inv_root = DMatrix::from_fn(r, r, |i, j| if i == j { 1.0 / eig.eigenvalues[keep[i]].sqrt() } else { 0.0 });
        let to_op = |m: DMatrix<f64>| -> Vec<Vec<Complex>> {
            (0..r)
                .map(|i| (0..r).map(|j| Complex::float(0.5 * (m[(i, j)] + m[(j, i)]), 0.0)).collect())
                .collect()
        };
        let states = self
            .a
            .iter()
            .map(|a| to_op(&root * u.transpose() * a * &u * &root))
            .collect();
        let effects = self
            .b
            .iter()
            .map(|b| to_op(&inv_root * u.transpose() * b * &u * &inv_root))
            .collect();
        QuantumModel::new(r, states, effects).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::catalog::d_3_third;
    use crate::families::make_identity;

    #[test]
    fn qubit_factorization_of_trine_matrix() {
        let c = d_3_third().to_f64();
        let f = factorize(&c, 2, 16, 7, 1e-9).expect("two-dimensional factorization exists");
        assert!(f.residual < 1e-9);
        let model = f.to_model().unwrap();
        let ev = model.eval().unwrap();
        let dev = c
            .iter()
            .zip(&ev.values)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        assert!(dev < 1e-8, "{dev}");
    }

    #[test]
    fn no_one_dimensional_factorization_of_identity() {
        let c = make_identity(2).unwrap().to_f64();
        assert!(factorize(&c, 1, 8, 0, 1e-9).is_none());
    }
}
