//! Named matrix families and the fixed matrices used in the examples.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CommMatrix;
use crate::rational::{int, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Identity,
    Uniform,
    D,
    G,
    A,
}

/// Parameters selecting one member of a family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub family: Family,
    pub n: usize,
    #[serde(default, with = "opt_rational")]
    pub eps: Option<Rational>,
    #[serde(default)]
    pub t: Option<usize>,
}

impl FamilyParams {
    pub fn build(&self) -> Result<CommMatrix> {
        match self.family {
            Family::Identity => make_identity(self.n),
            Family::Uniform => make_uniform(self.n),
            Family::D => {
                let eps = self
                    .eps
                    .as_ref()
                    .ok_or_else(|| Error::Param("family D needs eps".into()))?;
                make_d(self.n, eps)
            }
            Family::G => {
                let t = self
                    .t
                    .ok_or_else(|| Error::Param("family G needs t".into()))?;
                make_g(self.n, t)
            }
            Family::A => make_a(self.n),
        }
    }
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let text: Option<String> = Option::deserialize(d)?;
        text.map(|t| crate::rational::parse_rational(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

fn need(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Param(msg.into()))
    }
}

fn check_unit(name: &str, x: &Rational) -> Result<()> {
    need(
        !x.is_negative() && *x <= Rational::one(),
        format!("{name} = {x} outside [0,1]"),
    )
}

pub fn make_identity(n: usize) -> Result<CommMatrix> {
    need(n >= 1, "identity needs n >= 1")?;
    CommMatrix::from_fn(n, n, |i, j| if i == j { int(1) } else { int(0) })
}

pub fn make_uniform(n: usize) -> Result<CommMatrix> {
    need(n >= 1, "uniform matrix needs n >= 1")?;
    CommMatrix::from_fn(n, n, |_, _| rat(1, n as i64))
}

/// `1-ε` on the diagonal, `ε/(n-1)` elsewhere.
pub fn make_d(n: usize, eps: &Rational) -> Result<CommMatrix> {
    need(n >= 2, "D family needs n >= 2")?;
    check_unit("eps", eps)?;
    let off = eps / int(n as i64 - 1);
    let diag = Rational::one() - eps;
    CommMatrix::from_fn(n, n, |i, j| if i == j { diag.clone() } else { off.clone() })
}

/// Rows are the 0/1 patterns with `n-t` ones, scaled by `1/(n-t)`, in
/// decreasing lexicographic order.
pub fn make_g(n: usize, t: usize) -> Result<CommMatrix> {
    need(n >= 2, "G family needs n >= 2")?;
    need((1..n).contains(&t), format!("G family needs 1 <= t <= n-1, got t = {t}"))?;
    let ones = n - t;
    let mut patterns = Vec::new();
    let mut current = Vec::with_capacity(ones);
    combinations(n, ones, 0, &mut current, &mut patterns);
    let mut rows: Vec<Vec<bool>> = patterns
        .into_iter()
        .map(|support| {
            let mut row = vec![false; n];
            for j in support {
                row[j] = true;
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| b.cmp(a));
    let value = rat(1, ones as i64);
    CommMatrix::new(
        rows.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|on| if on { value.clone() } else { int(0) })
                    .collect()
            })
            .collect(),
    )
}

fn combinations(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for j in start..n {
        if n - j < k - cur.len() {
            break;
        }
        cur.push(j);
        combinations(n, k, j + 1, cur, out);
        cur.pop();
    }
}

/// Uniform antidistinguishability matrix, `G_{n,1}`.
pub fn make_a(n: usize) -> Result<CommMatrix> {
    need(n >= 2, "A family needs n >= 2")?;
    make_g(n, 1)
}

/// Parameter of the product `D_{n,ε} D_{n,μ}`.
pub fn d_compose(n: usize, eps: &Rational, mu: &Rational) -> Result<Rational> {
    need(n >= 2, "D family needs n >= 2")?;
    check_unit("eps", eps)?;
    check_unit("mu", mu)?;
    let n_r = int(n as i64);
    Ok(eps + mu - n_r.clone() / (n_r - int(1)) * eps * mu)
}

/// Recognizes `D_{n,ε}` and returns `(n, ε)`.
pub fn as_d_family(c: &CommMatrix) -> Option<(usize, Rational)> {
    let n = c.n_rows();
    if !c.is_square() || n < 2 {
        return None;
    }
    let diag = c.get(0, 0).clone();
    let off = c.get(0, 1).clone();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { &diag } else { &off };
            if c.get(i, j) != want {
                return None;
            }
        }
    }
    let eps = Rational::one() - diag;
    if eps.is_zero() || eps == off * int(n as i64 - 1) {
        Some((n, eps))
    } else {
        None
    }
}

fn halves(rows: &[&[i64]], den: i64) -> CommMatrix {
    CommMatrix::new(
        rows.iter()
            .map(|r| r.iter().map(|&x| rat(x, den)).collect())
            .collect(),
    )
    .expect("catalog matrix is row-stochastic")
}

/// The fixed matrices of the monotone comparison table and a few other
/// worked examples.
pub mod catalog {
    use super::*;

    pub fn k_plus() -> CommMatrix {
        halves(
            &[&[1, 1, 0, 0], &[1, 0, 1, 0], &[1, 0, 0, 1], &[0, 1, 0, 1], &[0, 0, 1, 1]],
            2,
        )
    }

    pub fn k() -> CommMatrix {
        halves(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 1]], 2)
    }

    pub fn k_minus() -> CommMatrix {
        halves(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1]], 2)
    }

    pub fn d_3_third() -> CommMatrix {
        make_d(3, &rat(1, 3)).expect("valid parameters")
    }

    pub fn table_a() -> CommMatrix {
        halves(&[&[2, 0, 0], &[1, 1, 0], &[1, 0, 1]], 2)
    }

    pub fn table_b() -> CommMatrix {
        halves(&[&[2, 1, 0], &[0, 2, 1], &[1, 0, 2]], 3)
    }

    pub fn table_c() -> CommMatrix {
        halves(&[&[2, 0, 0], &[0, 1, 1], &[1, 0, 1]], 2)
    }

    pub fn table_d() -> CommMatrix {
        halves(&[&[2, 0, 0], &[0, 1, 1], &[0, 0, 2]], 2)
    }

    /// Name, matrix, and expected `(rank, nneg_rank, psd_rank, λ_min, ι, λ_max)`.
    pub fn comparison_table() -> Vec<(&'static str, CommMatrix, TableRow)> {
        let row = |r, nr, psd, lmin: Rational, iota, lmax: Rational| TableRow {
            rank: r,
            nneg_rank: nr,
            psd_rank: psd,
            lambda_min: lmin,
            iota,
            lambda_max: lmax,
        };
        vec![
            ("K+", k_plus(), row(4, 4, 3, int(0), 2, int(2))),
            ("K", k(), row(3, 4, 3, int(0), 2, int(2))),
            ("K-", k_minus(), row(3, 3, 3, int(0), 2, int(2))),
            ("D_{3,1/3}", d_3_third(), row(3, 3, 2, rat(-1, 2), 1, int(2))),
            ("A", table_a(), row(3, 3, 3, rat(-1, 2), 1, int(2))),
            ("B", table_b(), row(3, 3, 3, int(0), 1, int(2))),
            ("C", table_c(), row(3, 3, 3, int(0), 2, int(2))),
            ("D", table_d(), row(3, 3, 3, int(0), 2, rat(5, 2))),
        ]
    }

    /// Four rows, five columns; maximal orthogonal row sets are {1,4} and {2,3}.
    pub fn iota_example() -> CommMatrix {
        CommMatrix::new(vec![
            vec![rat(1, 2), rat(1, 2), int(0), int(0), int(0)],
            vec![rat(1, 3), int(0), rat(1, 3), rat(1, 3), int(0)],
            vec![int(0), rat(1, 2), int(0), int(0), rat(1, 2)],
            vec![int(0), int(0), int(0), rat(1, 2), rat(1, 2)],
        ])
        .expect("row-stochastic")
    }

    /// `λ_max = tr = 2`, not qubit implementable.
    pub fn lambda_example_c() -> CommMatrix {
        halves(&[&[2, 1, 1, 0], &[0, 2, 1, 1], &[1, 0, 2, 1], &[1, 1, 0, 2]], 4)
    }

    /// `λ_max = tr = 2`, implementable with two antipodal qubit pairs.
    pub fn lambda_example_d() -> CommMatrix {
        halves(&[&[2, 0, 1, 1], &[0, 2, 1, 1], &[1, 1, 2, 0], &[1, 1, 0, 2]], 4)
    }

    /// First qubit matrix of the nonconvexity example.
    pub fn nonconvex_c() -> CommMatrix {
        CommMatrix::new(vec![
            vec![rat(1, 2), rat(1, 3), rat(1, 6)],
            vec![rat(1, 4), rat(2, 3), rat(1, 12)],
            vec![rat(1, 10), rat(1, 15), rat(5, 6)],
        ])
        .expect("row-stochastic")
    }

    /// Second qubit matrix of the nonconvexity example (states and outcomes relabelled).
    pub fn nonconvex_c_prime() -> CommMatrix {
        CommMatrix::new(vec![
            vec![rat(5, 6), rat(1, 15), rat(1, 10)],
            vec![rat(1, 12), rat(2, 3), rat(1, 4)],
            vec![rat(1, 6), rat(1, 3), rat(1, 2)],
        ])
        .expect("row-stochastic")
    }
}

/// Expected monotone values for one comparison-table column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub rank: usize,
    pub nneg_rank: usize,
    pub psd_rank: usize,
    pub lambda_min: Rational,
    pub iota: usize,
    pub lambda_max: Rational,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::multiply;

    fn m(rows: &[&[i64]], den: i64) -> CommMatrix {
        halves(rows, den)
    }

    #[test]
    fn identity_and_uniform() {
        assert_eq!(make_identity(1).unwrap().to_rows(), vec![vec![int(1)]]);
        assert!(make_identity(3).unwrap().is_identity());
        assert_eq!(make_uniform(2).unwrap(), m(&[&[1, 1], &[1, 1]], 2));
        assert!(make_identity(0).is_err());
    }

    #[test]
    fn d_family_members() {
        assert_eq!(make_d(3, &int(0)).unwrap(), make_identity(3).unwrap());
        assert_eq!(make_d(4, &rat(3, 4)).unwrap(), make_uniform(4).unwrap());
        assert_eq!(
            make_d(3, &rat(1, 3)).unwrap(),
            m(&[&[4, 1, 1], &[1, 4, 1], &[1, 1, 4]], 6)
        );
        assert_eq!(make_d(3, &int(1)).unwrap(), m(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]], 2));
        assert_eq!(make_d(2, &int(0)).unwrap(), make_identity(2).unwrap());
        assert!(make_d(3, &rat(3, 2)).is_err());
        assert!(make_d(3, &rat(-1, 2)).is_err());
        assert!(make_d(1, &int(0)).is_err());
    }

    #[test]
    fn g_family_members() {
        let g42 = make_g(4, 2).unwrap();
        assert_eq!(
            g42,
            m(
                &[&[1, 1, 0, 0], &[1, 0, 1, 0], &[1, 0, 0, 1], &[0, 1, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 1]],
                2
            )
        );
        // G_{3,2}: rows (1,0,0), (0,1,0), (0,0,1) in decreasing order
        assert_eq!(make_g(3, 2).unwrap(), make_identity(3).unwrap());
        assert_eq!(make_g(3, 1).unwrap(), m(&[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]], 2));
        assert_eq!(make_a(3).unwrap(), make_g(3, 1).unwrap());
        assert_eq!(make_g(5, 2).unwrap().n_rows(), 10);
        assert!(make_g(4, 4).is_err());
        assert!(make_g(4, 0).is_err());
        assert!(make_a(1).is_err());
    }

    #[test]
    fn a_family_zero_on_reversed_diagonal() {
        for n in 2..7 {
            let a = make_a(n).unwrap();
            for i in 0..n {
                assert!(a.get(i, n - 1 - i).is_zero());
            }
        }
    }

    #[test]
    fn d_products() {
        let d = make_d(3, &rat(1, 3)).unwrap();
        let id = make_identity(3).unwrap();
        assert_eq!(multiply(&id, &d).unwrap(), d);
        assert_eq!(multiply(&d, &d).unwrap(), make_d(3, &rat(1, 2)).unwrap());
        let v = make_uniform(3).unwrap();
        assert_eq!(multiply(&v, &make_d(3, &rat(1, 4)).unwrap()).unwrap(), v);
    }

    #[test]
    fn d_compose_values() {
        assert_eq!(d_compose(3, &rat(1, 3), &rat(1, 3)).unwrap(), rat(1, 2));
        assert_eq!(d_compose(5, &rat(2, 7), &int(0)).unwrap(), rat(2, 7));
        assert_eq!(d_compose(3, &rat(2, 3), &rat(1, 4)).unwrap(), rat(2, 3));
        assert!(d_compose(3, &int(2), &int(0)).is_err());
    }

    #[test]
    fn recognizes_d_members() {
        assert_eq!(as_d_family(&make_d(4, &rat(1, 5)).unwrap()), Some((4, rat(1, 5))));
        assert_eq!(as_d_family(&make_identity(3).unwrap()), Some((3, int(0))));
        assert_eq!(as_d_family(&make_a(3).unwrap()), None);
        assert_eq!(as_d_family(&make_identity(1).unwrap()), None);
    }
}
