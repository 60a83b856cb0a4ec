//! Closed-form ordering of the `D_{n,ε}` family.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::make_d;
use crate::matrix::{mix, CommMatrix};
use crate::rational::{int, Rational};
use crate::transform::StochasticPair;

fn check(n: usize, x: &Rational, what: &str) -> Result<()> {
    if n < 2 {
        return Err(Error::Param("D family needs n >= 2".into()));
    }
    if x.is_negative() || *x > Rational::one() {
        return Err(Error::Param(format!("{what} = {x} is outside [0,1]")));
    }
    Ok(())
}

/// Whether `D_{n,μ} ⪯ D_{n,ε}`.
pub fn decide_d_family(n: usize, eps: &Rational, mu: &Rational) -> Result<bool> {
    check(n, eps, "eps")?;
    check(n, mu, "mu")?;
    let uniform = Rational::one() - Rational::new(1.into(), (n as i64).into());
    let far = Rational::one() - eps / int(n as i64 - 1);
    Ok(if *eps <= uniform {
        eps <= mu && *mu <= far
    } else {
        far <= *mu && mu <= eps
    })
}

/// `λ` with `L_λ·D_{n,ε} = D_{n,μ}` where `L_λ = λ·1_n + (1−λ)·D_{n,1}`.
pub fn d_family_lambda(n: usize, eps: &Rational, mu: &Rational) -> Result<Rational> {
    if !decide_d_family(n, eps, mu)? {
        return Err(Error::Infeasible(format!("D_{{{n},{mu}}} is not below D_{{{n},{eps}}}")));
    }
    let m1 = int(n as i64 - 1);
    let den = Rational::one() - eps - eps / &m1;
    if den.is_zero() {
        // ε = 1 − 1/n forces μ = ε and any λ works
        return Ok(Rational::one());
    }
    Ok((Rational::one() - eps / &m1 - mu) / den)
}

/// Exact witness `(L_λ, 1_n)` for `D_{n,μ} ⪯ D_{n,ε}`.
pub fn d_family_witness(n: usize, eps: &Rational, mu: &Rational) -> Result<StochasticPair> {
    let lambda = d_family_lambda(n, eps, mu)?;
    let left = mix(&make_d(n, &Rational::zero())?, &make_d(n, &Rational::one())?, &lambda)?;
    let pair = StochasticPair::new(left, make_d(n, &Rational::zero())?);
    debug_assert!(pair.verifies(&make_d(n, mu)?, &make_d(n, eps)?));
    Ok(pair)
}

/// The set of `ε` for which `D_{n,ε}` is implementable in dimension `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuditInterval {
    #[serde(with = "crate::rational::serde_rational")]
    pub lo: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub hi: Rational,
    /// False when only an outer bound is known.
    pub exact: bool,
}

pub fn qudit_d_interval(n: usize, d: usize) -> QuditInterval {
    let frac = |a: usize, b: usize| Rational::new((a as i64).into(), (b as i64).into());
    if n <= d {
        return QuditInterval {
            lo: Rational::zero(),
            hi: Rational::one(),
            exact: true,
        };
    }
    if n > d * d {
        let x = Rational::one() - frac(1, n);
        return QuditInterval {
            lo: x.clone(),
            hi: x,
            exact: true,
        };
    }
    QuditInterval {
        lo: Rational::one() - frac(d, n),
        hi: Rational::one(),
        exact: d == 2 && (n == 3 || n == 4),
    }
}

/// Checks one `(ε, μ)` pair of the grid: a true prediction must come with a
/// verified witness, a false one with a λ_max or λ_min separation.
pub fn grid_point_agrees(n: usize, eps: &Rational, mu: &Rational) -> Result<bool> {
    let d = make_d(n, eps)?;
    let c = make_d(n, mu)?;
    if decide_d_family(n, eps, mu)? {
        Ok(d_family_witness(n, eps, mu)?.verifies(&c, &d))
    } else {
        Ok(separating_lambda(&c, &d).is_some())
    }
}

pub(crate) fn separating_lambda(c: &CommMatrix, d: &CommMatrix) -> Option<(super::Monotone, Rational, Rational)> {
    use crate::monotones::{lambda_max, lambda_min};
    let (a, b) = (lambda_max(c), lambda_max(d));
    if a > b {
        return Some((super::Monotone::LambdaMax, a, b));
    }
    let (a, b) = (lambda_min(c), lambda_min(d));
    (a > b).then_some((super::Monotone::LambdaMin, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn membership() {
        assert!(decide_d_family(3, &int(0), &int(1)).unwrap());
        assert!(!decide_d_family(3, &int(1), &rat(1, 3)).unwrap());
        assert!(decide_d_family(3, &int(1), &rat(1, 2)).unwrap());
        assert!(decide_d_family(3, &rat(2, 3), &rat(2, 3)).unwrap());
        assert!(!decide_d_family(3, &rat(2, 3), &rat(1, 2)).unwrap());
        assert!(decide_d_family(3, &rat(3, 2), &int(0)).is_err());
    }

    #[test]
    fn lambda_values() {
        // λ = 2/3: 1 − (2/3)(2/3) − (1/3)(1/6) = 1/2
        assert_eq!(d_family_lambda(3, &rat(1, 3), &rat(1, 2)).unwrap(), rat(2, 3));
        assert_eq!(d_family_lambda(4, &rat(1, 5), &rat(1, 5)).unwrap(), int(1));
        assert_eq!(d_family_lambda(3, &int(0), &int(1)).unwrap(), int(0));
        let w = d_family_witness(3, &int(0), &int(1)).unwrap();
        assert_eq!(w.left, make_d(3, &int(1)).unwrap());
    }

    #[test]
    fn witnesses_multiply_out() {
        let w = d_family_witness(3, &rat(1, 3), &rat(1, 2)).unwrap();
        let image = w.left.multiply(&make_d(3, &rat(1, 3)).unwrap()).unwrap();
        assert_eq!(image, make_d(3, &rat(1, 2)).unwrap());
        assert!(d_family_witness(3, &int(1), &rat(1, 3)).is_err());
    }

    #[test]
    fn qudit_intervals() {
        assert_eq!(
            qudit_d_interval(3, 2),
            QuditInterval { lo: rat(1, 3), hi: int(1), exact: true }
        );
        assert_eq!(qudit_d_interval(2, 2), QuditInterval { lo: int(0), hi: int(1), exact: true });
        assert_eq!(
            qudit_d_interval(10, 2),
            QuditInterval { lo: rat(9, 10), hi: rat(9, 10), exact: true }
        );
        assert!(!qudit_d_interval(5, 3).exact);
    }
}
