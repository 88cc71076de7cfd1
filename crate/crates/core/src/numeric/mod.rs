//! Exact arithmetic: rationals, integer polynomials in `t`, and the field of
//! rational functions in `t`.

mod intpoly;
mod ratfunc;
mod rational;

pub use intpoly::{t_analogue, IntPolyT};
pub use ratfunc::{ratfunc_arith, ArithOp, RatFuncT};
pub use rational::{parse_rational, parse_rational_list, rat, Rational};
