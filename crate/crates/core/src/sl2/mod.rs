//! The group SL(2,R): matrices and the projective line, coefficient curves
//! and the equation `Phi' = A(t) Phi`, the gauge action on coefficients, and
//! vector-field realizations of the Lie algebra.

mod coeffs;
mod gauge;
mod mat2;
mod vfield;

pub use coeffs::{algebra_matrix, fundamental_solution, Mat2Curve, Sl2Coeffs};
pub use gauge::{gauge_transform, GaugeCurve};
pub use mat2::{ExtReal, Mat2};
pub use vfield::{
    ermakov_generators, generalized_ermakov_generators, oscillator_generators, pinney_generators,
    pinney_triple_generators, riccati_generators, structure_constants, PolyVectorField,
};
