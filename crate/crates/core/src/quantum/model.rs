//! Finite-dimensional quantum models: density matrices and a POVM.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::CommMatrix;
use crate::rational::{parse_rational, to_f64, Rational};

/// Real number stored exactly when possible.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Exact(Rational),
    Float(f64),
}

impl Real {
    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(r) => to_f64(r),
            Real::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Real::Exact(r) => Some(r),
            Real::Float(_) => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Real::Exact(r) => Value::String(r.to_string()),
            Real::Float(x) => json!(x),
        }
    }

    fn from_json(v: &Value) -> Result<Real> {
        match v {
            Value::String(s) => Ok(Real::Exact(parse_rational(s)?)),
            Value::Number(n) if n.is_i64() => Ok(Real::Exact(Rational::from_integer(n.as_i64().unwrap().into()))),
            Value::Number(n) => Ok(Real::Float(n.as_f64().unwrap_or(f64::NAN))),
            Value::Null => Ok(Real::Exact(Rational::zero())),
            other => Err(Error::Model(format!("bad number {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Real,
    pub im: Real,
}

impl Complex {
    pub fn exact(re: Rational, im: Rational) -> Self {
        Self {
            re: Real::Exact(re),
            im: Real::Exact(im),
        }
    }

    pub fn float(re: f64, im: f64) -> Self {
        Self {
            re: Real::Float(re),
            im: Real::Float(im),
        }
    }
}

/// `d×d` complex matrix, row-major.
pub type Operator = Vec<Vec<Complex>>;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumModel {
    pub dim: usize,
    pub states: Vec<Operator>,
    pub effects: Vec<Operator>,
}

/// Result of evaluating `tr(ρ_a E_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// Present for models with only rational entries.
    pub exact: Option<CommMatrix>,
    pub values: Vec<Vec<f64>>,
    /// Largest `|Σ_b C_ab - 1|`.
    pub max_row_deviation: f64,
}

#[derive(Clone)]
struct Q {
    re: Rational,
    im: Rational,
}

fn exact_op(op: &Operator) -> Option<Vec<Vec<Q>>> {
    op.iter()
        .map(|row| {
            row.iter()
                .map(|z| {
                    Some(Q {
                        re: z.re.exact()?.clone(),
                        im: z.im.exact()?.clone(),
                    })
                })
                .collect()
        })
        .collect()
}

fn float_op(op: &Operator) -> Vec<Vec<(f64, f64)>> {
    op.iter()
        .map(|row| row.iter().map(|z| (z.re.to_f64(), z.im.to_f64())).collect())
        .collect()
}

/// Real symmetric `2d×2d` embedding `[[A, -B], [B, A]]` of `A + iB`.
fn embed<T: Clone + std::ops::Neg<Output = T>>(re: &[Vec<T>], im: &[Vec<T>]) -> Vec<Vec<T>> {
    let d = re.len();
    (0..2 * d)
        .map(|r| {
            (0..2 * d)
                .map(|c| match (r < d, c < d) {
                    (true, true) => re[r][c].clone(),
                    (true, false) => -im[r][c - d].clone(),
                    (false, true) => im[r - d][c].clone(),
                    (false, false) => re[r - d][c - d].clone(),
                })
                .collect()
        })
        .collect()
}

/// Exact positive-semidefiniteness of a symmetric rational matrix by
/// symmetric elimination: a zero pivot forces its whole row to vanish.
pub fn is_psd_exact(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    let mut a = m.to_vec();
    for k in 0..n {
        let p = a[k][k].clone();
        if p.is_negative() {
            return false;
        }
        if p.is_zero() {
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &p;
            for j in k + 1..n {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
            a[i][k] = Rational::zero();
        }
    }
    true
}

pub fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mat = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j] + m[j][i]));
    mat.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

impl QuantumModel {
    pub fn new(dim: usize, states: Vec<Operator>, effects: Vec<Operator>) -> Result<Self> {
        if dim == 0 || states.is_empty() || effects.is_empty() {
            return Err(Error::Model("need dim >= 1, at least one state and one effect".into()));
        }
        for (kind, ops) in [("state", &states), ("effect", &effects)] {
            for (i, op) in ops.iter().enumerate() {
                if op.len() != dim || op.iter().any(|r| r.len() != dim) {
                    return Err(Error::Model(format!("{kind} {i} is not {dim}x{dim}")));
                }
            }
        }
        Ok(Self { dim, states, effects })
    }

    pub fn is_exact(&self) -> bool {
        self.states.iter().chain(&self.effects).all(|op| exact_op(op).is_some())
    }

    /// Checks Hermiticity, positivity, unit trace of states and completeness
    /// of the effects; exactly for rational models, within `tol` otherwise.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let bad = |what: String| Err(Error::Model(what));
        let exact: Option<(Vec<_>, Vec<_>)> = self
            .states
            .iter()
            .map(exact_op)
            .collect::<Option<Vec<_>>>()
            .zip(self.effects.iter().map(exact_op).collect::<Option<Vec<_>>>());
        let d = self.dim;
        if let Some((states, effects)) = exact {
            let hermitian = |m: &Vec<Vec<Q>>| {
                (0..d).all(|i| (0..d).all(|j| m[i][j].re == m[j][i].re && m[i][j].im == -m[j][i].im.clone()))
            };
            let psd = |m: &Vec<Vec<Q>>| {
                let re: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|z| z.re.clone()).collect()).collect();
                let im: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|z| z.im.clone()).collect()).collect();
                is_psd_exact(&embed(&re, &im))
            };
            for (kind, ops) in [("state", &states), ("effect", &effects)] {
                for (i, m) in ops.iter().enumerate() {
                    if !hermitian(m) {
                        return bad(format!("{kind} {i} is not Hermitian"));
                    }
                    if !psd(m) {
                        return bad(format!("{kind} {i} is not positive semidefinite"));
                    }
                }
            }
            for (i, m) in states.iter().enumerate() {
                let tr: Rational = (0..d).map(|k| m[k][k].re.clone()).sum();
                if !tr.is_one() {
                    return bad(format!("state {i} has trace {tr}, deficit {}", Rational::one() - &tr));
                }
            }
            for r in 0..d {
                for c in 0..d {
                    let re: Rational = effects.iter().map(|m| m[r][c].re.clone()).sum();
                    let im: Rational = effects.iter().map(|m| m[r][c].im.clone()).sum();
                    let want = if r == c { Rational::one() } else { Rational::zero() };
                    if re != want || !im.is_zero() {
                        return bad(format!("effects do not sum to the identity at ({r},{c})"));
                    }
                }
            }
            return Ok(());
        }
        let states: Vec<_> = self.states.iter().map(float_op).collect();
        let effects: Vec<_> = self.effects.iter().map(float_op).collect();
        for (kind, ops) in [("state", &states), ("effect", &effects)] {
            for (i, m) in ops.iter().enumerate() {
                let herm = (0..d)
                    .flat_map(|a| (0..d).map(move |b| (a, b)))
                    .map(|(a, b)| (m[a][b].0 - m[b][a].0).abs() + (m[a][b].1 + m[b][a].1).abs())
                    .fold(0.0, f64::max);
                if herm > tol {
                    return bad(format!("{kind} {i} is not Hermitian (deviation {herm:e})"));
                }
                let re: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|z| z.0).collect()).collect();
                let im: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|z| z.1).collect()).collect();
                let low = min_eigenvalue(&embed(&re, &im));
                if low < -tol {
                    return bad(format!("{kind} {i} has eigenvalue {low:e}"));
                }
            }
        }
        for (i, m) in states.iter().enumerate() {
            let tr: f64 = (0..d).map(|k| m[k][k].0).sum();
            if (tr - 1.0).abs() > tol {
                return bad(format!("state {i} has trace {tr}, deficit {:e}", 1.0 - tr));
            }
        }
        for r in 0..d {
            for c in 0..d {
                let re: f64 = effects.iter().map(|m| m[r][c].0).sum();
                let im: f64 = effects.iter().map(|m| m[r][c].1).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                if (re - want).abs() > tol || im.abs() > tol {
                    return bad(format!("effects do not sum to the identity at ({r},{c})"));
                }
            }
        }
        Ok(())
    }

    /// Matrix of `tr(ρ_a E_b)`.
    pub fn eval(&self) -> Result<Evaluation> {
        let d = self.dim;
        let exact_states: Option<Vec<_>> = self.states.iter().map(exact_op).collect();
        let exact_effects: Option<Vec<_>> = self.effects.iter().map(exact_op).collect();
        if let (Some(states), Some(effects)) = (exact_states, exact_effects) {
            let mut rows = Vec::with_capacity(states.len());
            for (a, s) in states.iter().enumerate() {
                let mut row = Vec::with_capacity(effects.len());
                for (b, e) in effects.iter().enumerate() {
                    let (mut re, mut im) = (Rational::zero(), Rational::zero());
                    for k in 0..d {
                        for l in 0..d {
                            re += &s[k][l].re * &e[l][k].re - &s[k][l].im * &e[l][k].im;
                            im += &s[k][l].re * &e[l][k].im + &s[k][l].im * &e[l][k].re;
                        }
                    }
                    if !im.is_zero() {
                        return Err(Error::Model(format!("tr(state {a} * effect {b}) has imaginary part {im}")));
                    }
                    row.push(re);
                }
                rows.push(row);
            }
            let values = rows.iter().map(|r| r.iter().map(to_f64).collect()).collect();
            let matrix = CommMatrix::new(rows)?;
            return Ok(Evaluation {
                exact: Some(matrix),
                values,
                max_row_deviation: 0.0,
            });
        }
        let states: Vec<_> = self.states.iter().map(float_op).collect();
        let effects: Vec<_> = self.effects.iter().map(float_op).collect();
        let values: Vec<Vec<f64>> = states
            .iter()
            .map(|s| {
                effects
                    .iter()
                    .map(|e| {
                        let mut re = 0.0;
                        for k in 0..d {
                            for l in 0..d {
                                re += s[k][l].0 * e[l][k].0 - s[k][l].1 * e[l][k].1;
                            }
                        }
                        re
                    })
                    .collect()
            })
            .collect();
        let max_row_deviation = values
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(Evaluation {
            exact: None,
            values,
            max_row_deviation,
        })
    }

    pub fn to_json(&self) -> Value {
        let op = |m: &Operator| -> Value {
            m.iter()
                .map(|r| r.iter().map(|z| json!({"re": z.re.to_json(), "im": z.im.to_json()})).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into()
        };
        json!({
            "dim": self.dim,
            "states": self.states.iter().map(op).collect::<Vec<_>>(),
            "effects": self.effects.iter().map(op).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let dim = v
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Model("missing \"dim\"".into()))? as usize;
        let ops = |key: &str| -> Result<Vec<Operator>> {
            let list = v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Model(format!("missing \"{key}\"")))?;
            list.iter()
                .map(|m| {
                    m.as_array()
                        .ok_or_else(|| Error::Model("operator must be an array of rows".into()))?
                        .iter()
                        .map(|row| {
                            row.as_array()
                                .ok_or_else(|| Error::Model("row must be an array".into()))?
                                .iter()
                                .map(|z| {
                                    Ok(Complex {
                                        re: Real::from_json(z.get("re").unwrap_or(&Value::Null))?,
                                        im: Real::from_json(z.get("im").unwrap_or(&Value::Null))?,
                                    })
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        Self::new(dim, ops("states")?, ops("effects")?)
    }
}

/// Compares a model with a target matrix: exact equality for rational
/// models, `max |eval - C| <= tol` otherwise. Returns the largest deviation.
pub fn verify_model(m: &QuantumModel, c: &CommMatrix, tol: f64) -> Result<(bool, f64)> {
    let ev = m.eval()?;
    if ev.values.len() != c.n_rows() || ev.values.iter().any(|r| r.len() != c.n_cols()) {
        return Err(Error::Shape(format!(
            "model gives {} states x {} effects, matrix is {}x{}",
            m.states.len(),
            m.effects.len(),
            c.n_rows(),
            c.n_cols()
        )));
    }
    let dev = c.max_abs_diff(&ev.values);
    match ev.exact {
        Some(exact) => Ok((exact == *c, dev)),
        None => Ok((dev <= tol, dev)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn real_exact(rows: &[&[Rational]]) -> Operator {
        rows.iter()
            .map(|r| r.iter().map(|x| Complex::exact(x.clone(), int(0))).collect())
            .collect()
    }

    #[test]
    fn psd_exact_examples() {
        assert!(is_psd_exact(&[vec![int(1), int(1)], vec![int(1), int(1)]]));
        assert!(!is_psd_exact(&[vec![int(1), int(2)], vec![int(2), int(1)]]));
        assert!(!is_psd_exact(&[vec![int(0), int(1)], vec![int(1), int(0)]]));
        assert!(is_psd_exact(&[vec![int(0), int(0)], vec![int(0), int(3)]]));
        assert!(!is_psd_exact(&[vec![int(-1)]]));
    }

    #[test]
    fn maximally_mixed_states_give_equal_rows() {
        let half = rat(1, 2);
        let mixed = real_exact(&[&[half.clone(), int(0)], &[int(0), half.clone()]]);
        let e0 = real_exact(&[&[int(1), int(0)], &[int(0), int(0)]]);
        let e1 = real_exact(&[&[int(0), int(0)], &[int(0), int(1)]]);
        let m = QuantumModel::new(2, vec![mixed.clone(), mixed], vec![e0, e1]).unwrap();
        m.validate(0.0).unwrap();
        let c = m.eval().unwrap().exact.unwrap();
        assert_eq!(c.row(0), c.row(1));
        assert_eq!(c.row(0), &[half.clone(), half][..]);
    }

    #[test]
    fn validation_names_the_problem() {
        let bad = real_exact(&[&[int(2), int(0)], &[int(0), int(-1)]]);
        let e = real_exact(&[&[int(1), int(0)], &[int(0), int(1)]]);
        let m = QuantumModel::new(2, vec![bad], vec![e]).unwrap();
        let err = m.validate(0.0).unwrap_err().to_string();
        assert!(err.contains("state 0"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let s = vec![vec![Complex::exact(int(1), int(0))]];
        let e = vec![vec![Complex::float(1.0, 0.0)]];
        let m = QuantumModel::new(1, vec![s], vec![e]).unwrap();
        assert_eq!(QuantumModel::from_json(&m.to_json()).unwrap(), m);
        assert!(!m.is_exact());
    }
}
