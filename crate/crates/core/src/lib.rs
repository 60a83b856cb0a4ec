//! Exact communication matrices, ultraweak monotones and certified
//! majorization decisions between them.

pub mod budget;
pub mod clique;
pub mod error;
pub mod families;
pub mod io;
pub mod lp;
pub mod majorization;
pub mod matrix;
pub mod monotones;
pub mod quantum;
pub mod rational;
pub mod transform;

pub use budget::Budget;
pub use error::{Error, Result};
pub use matrix::CommMatrix;
pub use rational::Rational;
pub use transform::StochasticPair;
