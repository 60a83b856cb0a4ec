use std::fmt;
use std::time::Duration;

use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::matrix::CommMatrix;
use crate::rational::Rational;
use crate::transform::StochasticPair;

use super::bnb::SearchTree;
use super::dfamily::decide_d_family;
use super::screen::monotone_values;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Majorizes,
    NotMajorizes,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Majorizes => "Majorizes",
            Outcome::NotMajorizes => "NotMajorizes",
            Outcome::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Monotone {
    Rank,
    NnegRank,
    PsdRank,
    LambdaMax,
    LambdaMin,
    Iota,
}

impl Monotone {
    pub fn name(self) -> &'static str {
        match self {
            Monotone::Rank => "rank",
            Monotone::NnegRank => "nneg_rank",
            Monotone::PsdRank => "psd_rank",
            Monotone::LambdaMax => "lambda_max",
            Monotone::LambdaMin => "lambda_min",
            Monotone::Iota => "iota",
        }
    }
}

/// Reason attached to a verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// `f(C) > f(D)` for a monotone `f`. For the two ranks the values are a
    /// lower bound on `C` and an upper bound on `D`.
    MonotoneSeparation {
        monotone: Monotone,
        on_c: Rational,
        on_d: Rational,
    },
    ExactWitness(StochasticPair),
    /// Certified lower bound on `min ‖C − L·D·R‖∞` over all stochastic pairs.
    BranchBoundBound {
        bound: Rational,
        nodes: usize,
        tree: Option<SearchTree>,
    },
    /// Both matrices in the `D_{n,ε}` family.
    ClosedForm {
        rule: String,
        separation: Option<(Monotone, Rational, Rational)>,
    },
}

impl Certificate {
    /// Re-checks the certificate against `C ⪯ D` from scratch.
    pub fn check(&self, c: &CommMatrix, d: &CommMatrix) -> bool {
        match self {
            Certificate::MonotoneSeparation { monotone, on_c, on_d } => {
                on_c > on_d && monotone_values(*monotone, c, d).is_some_and(|(x, y)| x == *on_c && y == *on_d)
            }
            Certificate::ExactWitness(w) => w.verifies(c, d),
            Certificate::BranchBoundBound { bound, tree, .. } => {
                bound.is_positive() && tree.as_ref().is_some_and(|t| t.replay(c, d).is_some_and(|b| b >= *bound))
            }
            Certificate::ClosedForm { separation, .. } => {
                let (Some((n, mu)), Some((m, eps))) =
                    (crate::families::as_d_family(c), crate::families::as_d_family(d))
                else {
                    return false;
                };
                if n != m {
                    return false;
                }
                let holds = decide_d_family(n, &eps, &mu).unwrap_or(false);
                match separation {
                    None => holds,
                    Some((f, x, y)) => {
                        !holds && x > y && monotone_values(*f, c, d).is_some_and(|(a, b)| a == *x && b == *y)
                    }
                }
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Certificate::MonotoneSeparation { monotone, on_c, on_d } => json!({
                "kind": "MonotoneSeparation",
                "monotone": monotone.name(),
                "value_on_c": on_c.to_string(),
                "value_on_d": on_d.to_string(),
            }),
            Certificate::ExactWitness(w) => json!({
                "kind": "ExactWitness",
                "witness": serde_json::to_value(w).expect("witness serializes"),
            }),
            Certificate::BranchBoundBound { bound, nodes, tree } => json!({
                "kind": "BranchBoundBound",
                "bound": bound.to_string(),
                "nodes": nodes,
                "leaves": tree.as_ref().map(SearchTree::leaf_count),
            }),
            Certificate::ClosedForm { rule, separation } => json!({
                "kind": "ClosedForm",
                "rule": rule,
                "separation": separation.as_ref().map(|(f, x, y)| json!({
                    "monotone": f.name(),
                    "value_on_c": x.to_string(),
                    "value_on_d": y.to_string(),
                })),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub certificate: Option<Certificate>,
    /// Present exactly when `outcome` is `Majorizes`.
    pub witness: Option<StochasticPair>,
    /// Best `‖C − L·D·R‖∞` seen by the numerical searches.
    pub residual: Option<f64>,
    /// Best certified lower bound on the residual, if branch and bound ran.
    pub lower_bound: Option<Rational>,
    pub nodes: usize,
    /// Pipeline stage that produced the outcome.
    pub stage: &'static str,
    pub elapsed: Duration,
}

impl Verdict {
    pub(crate) fn majorizes(witness: StochasticPair, certificate: Certificate, stage: &'static str) -> Self {
        Self {
            outcome: Outcome::Majorizes,
            certificate: Some(certificate),
            witness: Some(witness),
            residual: Some(0.0),
            lower_bound: None,
            nodes: 0,
            stage,
            elapsed: Duration::ZERO,
        }
    }

    pub(crate) fn refuted(certificate: Certificate, stage: &'static str) -> Self {
        Self {
            outcome: Outcome::NotMajorizes,
            certificate: Some(certificate),
            witness: None,
            residual: None,
            lower_bound: None,
            nodes: 0,
            stage,
            elapsed: Duration::ZERO,
        }
    }

    pub(crate) fn unknown(residual: Option<f64>) -> Self {
        Self {
            outcome: Outcome::Unknown,
            certificate: None,
            witness: None,
            residual,
            lower_bound: None,
            nodes: 0,
            stage: "exhausted",
            elapsed: Duration::ZERO,
        }
    }

    /// Soundness check: a `Majorizes` witness must verify exactly and a
    /// `NotMajorizes` certificate must re-check.
    pub fn verify(&self, c: &CommMatrix, d: &CommMatrix) -> bool {
        match self.outcome {
            Outcome::Majorizes => self.witness.as_ref().is_some_and(|w| w.verifies(c, d)),
            Outcome::NotMajorizes => self.certificate.as_ref().is_some_and(|cert| cert.check(c, d)),
            Outcome::Unknown => true,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "outcome": self.outcome.to_string(),
            "certificate": self.certificate.as_ref().map(Certificate::to_json),
            "witness": self.witness.as_ref().map(|w| serde_json::to_value(w).expect("witness serializes")),
            "residual": self.residual,
            "bound": self.lower_bound.as_ref().map(|b| b.to_string()),
            "nodes": self.nodes,
            "stage": self.stage,
            "elapsed_ms": self.elapsed.as_millis() as u64,
        })
    }
}
