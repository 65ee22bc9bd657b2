#![allow(dead_code)]

use liesys::exprfn::parse;
use liesys::sl2::{ExtReal, Sl2Coeffs};
use liesys::Expr;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

/// `|a - b| / max(1, |b|)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// [`rel`] for finite values, chordal distance when either is infinite.
pub fn rel_ext(a: f64, b: f64) -> f64 {
    if a.is_finite() && b.is_finite() {
        rel(a, b)
    } else {
        ExtReal::from_real(a).chordal_distance(ExtReal::from_real(b))
    }
}

/// A cubic polynomial or a scaled exponential in `t` with small coefficients.
pub fn smooth_coeff(rng: &mut Rng8) -> String {
    let mut c = || rng.gen_range(-0.5..0.5);
    if c() < 0.0 {
        format!("({}) + ({})*t + ({})*t^2 + ({})*t^3", c(), c(), c(), c() / 4.0)
    } else {
        format!("({}) * exp(({})*t) + ({})", c(), 2.0 * c(), c())
    }
}

pub fn smooth_coeffs(rng: &mut Rng8) -> Sl2Coeffs {
    let (b0, b1, b2) = (smooth_coeff(rng), smooth_coeff(rng), smooth_coeff(rng));
    Sl2Coeffs::parse(&b0, &b1, &b2).expect("generated coefficients parse")
}

/// A positive, slowly varying squared frequency.
pub fn omega2(rng: &mut Rng8) -> Expr {
    let a = rng.gen_range(0.0..0.4);
    let b = rng.gen_range(0.3..2.0);
    let c = rng.gen_range(0.0..0.3);
    let d = rng.gen_range(0.3..2.0);
    parse(&format!("1 + {a}*sin({b}*t) + {c}*cos({d}*t)")).expect("generated frequency parses")
}
