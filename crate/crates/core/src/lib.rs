//! Solving, reducing and verifying Lie systems whose Lie group is SL(2,R).
//!
//! Riccati equations, time-dependent harmonic oscillators (Caldirola–Kanai
//! included), the Milne–Pinney equation and Ermakov systems all share the same
//! equation on SL(2,R); they differ only in the action used to read solutions
//! off the group. The crate is organised accordingly:
//!
//! * [`exprfn`]: parsed scalar expressions with exact symbolic derivatives.
//! * [`numerics`]: adaptive Runge–Kutta integration, adaptive Simpson
//!   quadrature and constancy detection.
//! * [`sl2`]: the group itself, the Möbius action, the gauge action on
//!   coefficient curves and Lie brackets of vector-field realizations.
//! * [`riccati`], [`oscillator`], [`ermakov`]: the concrete systems and their
//!   superposition rules, reductions and invariants.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ermakov;
pub mod error;
pub mod exprfn;
pub mod numerics;
pub mod oscillator;
pub mod riccati;
mod scalar;
pub mod sl2;

pub use error::{Error, Result};
pub use exprfn::{Env, Expr, Func, Var};
pub use scalar::{linspace, Real};

pub type Mat2f64 = sl2::Mat2<f64>;
pub type ExtRealf64 = sl2::ExtReal<f64>;
pub type Mat2Curvef64 = sl2::Mat2Curve<f64>;
pub type Trajectoryf64 = numerics::Trajectory<f64>;
pub type IntegratorConfigf64 = numerics::IntegratorConfig<f64>;
pub type ConstancyReportf64 = numerics::ConstancyReport<f64>;
pub type IntegrabilityReportf64 = riccati::IntegrabilityReport<f64>;
pub type RiccatiProblemf64 = riccati::RiccatiProblem<f64>;

pub type Mat2f32 = sl2::Mat2<f32>;
pub type Trajectoryf32 = numerics::Trajectory<f32>;
