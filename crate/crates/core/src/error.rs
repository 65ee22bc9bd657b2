use thiserror::Error;

use crate::exprfn::{EvalError, ParseError};
use crate::numerics::{ConstancyReport, NumericError};

/// Errors raised by the Lie-system pipelines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    /// Coincident points, vanishing Wronskian and similar degenerate input.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A proposed particular solution fails the residual check.
    #[error("not a solution: residual {residual:.3e} exceeds {tol:.3e}")]
    NotASolution { residual: f64, tol: f64 },
    /// `b0 * b2` vanishes (or changes sign) on the sample grid.
    #[error("b0*b2 vanishes near t = {t}")]
    VanishingProduct { t: f64 },
    /// The integrability function is not constant on the grid.
    #[error(
        "not integrable by scaling: K(t) varies (mean {:.6e}, max deviation {:.3e})",
        .report.mean, .report.max_deviation
    )]
    Rejected { report: ConstancyReport<f64> },
    /// Blow-up of a closed-form solution, bracketed by `[lo, hi]`.
    #[error("solution blows up in [{lo}, {hi}]")]
    BlowUp { lo: f64, hi: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
