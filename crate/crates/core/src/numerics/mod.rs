//! Numerical building blocks: adaptive ODE integration, adaptive quadrature,
//! the constancy detector and the CSV number format shared by every output.

mod constancy;
mod ode;
mod quad;
mod trajectory;

use thiserror::Error;

pub use constancy::{constancy, ConstancyReport, DEFAULT_CONSTANCY_TOL};
pub use ode::{integrate_ode, integrate_ode_guarded, rk4_fixed, Dopri5, IntegratorConfig, RhsError};
pub use quad::{quad, quad_expr};
pub use trajectory::{fmt_e12, Event, EventKind, Trajectory};

pub(crate) use ode::check_samples;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("step budget exhausted at t = {t}")]
    StepBudget { t: f64 },
    #[error("step size underflow after t = {t}")]
    StepUnderflow { t: f64 },
    #[error("right-hand side failed near t = {t}: {message}")]
    Rhs { t: f64, message: String },
    #[error("non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("subdivision limit reached on [{a}, {b}]")]
    SubdivisionLimit { a: f64, b: f64 },
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
}
