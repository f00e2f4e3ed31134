//! Exact value domain: big rationals, dense polynomials in β and canonical
//! rational functions in β.

mod poly;
mod rat;
mod ratfunc;

pub use poly::BetaPoly;
pub use rat::Rat;
pub use ratfunc::{eval_rational, ratfunc_normalize, RatFuncBeta};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("pole at beta = {beta}: denominator {denominator} vanishes")]
    Pole { beta: Rat, denominator: String },
    #[error("cannot parse rational number from {0:?}")]
    Parse(String),
}
