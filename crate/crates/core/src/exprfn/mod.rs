//! Scalar expressions of time and phase-space variables: parsing, evaluation,
//! symbolic differentiation and a canonical form for identity checks.

mod ast;
mod canon;
mod diff;
mod parse;
mod simplify;

pub use ast::{Env, EvalError, Expr, Func, Var};
pub use parse::{parse, ParseError};
