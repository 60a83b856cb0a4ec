//! Exact row-stochastic matrices.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};

/// A row-stochastic matrix with exact rational entries.
///
/// Every entry is nonnegative and every row sums to exactly one. The only
/// way to build one is through [`CommMatrix::new`] (or the family
/// generators), so the invariants hold for every value of this type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CommMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Rational>,
}

impl CommMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Empty);
        }
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Ragged {
                    row: i,
                    found: row.len(),
                    expected: n_cols,
                });
            }
            let mut sum = Rational::zero();
            for (j, x) in row.iter().enumerate() {
                if x.is_negative() {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: x.clone(),
                    });
                }
                sum += x;
            }
            if !sum.is_one() {
                return Err(Error::RowSum {
                    row: i,
                    deficit: Rational::one() - sum,
                });
            }
            entries.extend(row);
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn from_fn(
        n_rows: usize,
        n_cols: usize,
        mut f: impl FnMut(usize, usize) -> Rational,
    ) -> Result<Self> {
        Self::new(
            (0..n_rows)
                .map(|i| (0..n_cols).map(|j| f(i, j)).collect())
                .collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> + '_ {
        self.entries.chunks(self.n_cols)
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.n_rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.rows().map(<[Rational]>::to_vec).collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.iter().map(to_f64).collect()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.n_rows).all(|i| {
                (0..self.n_cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn trace(&self) -> Rational {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    /// Exact product; the result is again row-stochastic.
    pub fn multiply(&self, other: &CommMatrix) -> Result<CommMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut entries = vec![Rational::zero(); self.n_rows * other.n_cols];
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.n_cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        entries[i * other.n_cols + j] += a * b;
                    }
                }
            }
        }
        Ok(CommMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            entries,
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> CommMatrix {
        let entries = rows
            .iter()
            .flat_map(|&i| self.row(i).iter().cloned())
            .collect();
        CommMatrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            entries,
        }
    }

    /// Largest entrywise deviation from `target` as a double.
    pub fn max_abs_diff(&self, target: &[Vec<f64>]) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let t = target.get(i).and_then(|r| r.get(j)).copied().unwrap_or(f64::NAN);
                worst = worst.max((to_f64(x) - t).abs());
            }
        }
        worst
    }
}

pub fn multiply(a: &CommMatrix, b: &CommMatrix) -> Result<CommMatrix> {
    a.multiply(b)
}

/// Convex combination `t·a + (1-t)·b` of two same-shape matrices.
pub fn mix(a: &CommMatrix, b: &CommMatrix, t: &Rational) -> Result<CommMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::Shape("mixing needs equal shapes".into()));
    }
    if t.is_negative() || *t > Rational::one() {
        return Err(Error::Param(format!("mixing weight {t} outside [0,1]")));
    }
    let s = Rational::one() - t;
    CommMatrix::from_fn(a.n_rows, a.n_cols, |i, j| t * a.get(i, j) + &s * b.get(i, j))
}

impl fmt::Display for CommMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .rows()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for row in &cells {
            let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "[ {} ]", line.join("  "))?;
        }
        Ok(())
    }
}
