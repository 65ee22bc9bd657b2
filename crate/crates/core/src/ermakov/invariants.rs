use super::{ErmakovState, GeneralizedErmakovSpec};
use crate::error::{Error, Result};
use crate::exprfn::{Expr, Var};
use crate::numerics::quad_expr;
use crate::Real;

/// `k (x/y)^2 + (x vy - y vx)^2` for the oscillator `x` and the Pinney
/// variable `y` with constant `k`.
pub fn ermakov_invariant<T: Real>(st: &ErmakovState<T>, k: T) -> Result<T> {
    if st.y == T::zero() {
        return Err(Error::Precondition("the Ermakov invariant needs y != 0".into()));
    }
    let r = st.x / st.y;
    let xi = st.xi();
    Ok(k * r * r + xi * xi)
}

/// `xi^2/2 + integral from u* to x/y of (-u^-3 f(1/u) + u g(1/u)) du`.
///
/// Vanishing `f` or `g` drop out of the integrand, so with `f = 0`, `g = 1`
/// and `u* = 0` this is exactly half the Ermakov invariant.
pub fn generalized_invariant<T: Real>(spec: &GeneralizedErmakovSpec, st: &ErmakovState<T>, tol: T) -> Result<T> {
    if st.y == T::zero() {
        return Err(Error::Precondition("the generalized invariant needs y != 0".into()));
    }
    let (a, b) = (T::lit(spec.base), st.x / st.y);
    let u = Expr::var(Var::U);
    let flip = u.clone().recip();
    let f_zero = spec.f.is_identically_zero();
    let g_const = spec.g.as_const().is_some();
    let touches_zero = a.min(b) <= T::zero() && a.max(b) >= T::zero();
    if touches_zero && (!f_zero || !g_const) {
        return Err(Error::Degenerate(format!(
            "integrand is singular at u = 0, between {a} and {b}"
        )));
    }
    let mut h = Expr::zero();
    if !f_zero {
        h = h - u.clone().pow(-3.0) * spec.f.substitute(Var::U, &flip);
    }
    if !spec.g.is_identically_zero() {
        h = h + u * spec.g.substitute(Var::U, &flip);
    }
    let xi = st.xi();
    let half = T::lit(0.5);
    if h.is_identically_zero() {
        return Ok(half * xi * xi);
    }
    Ok(half * xi * xi + quad_expr(&h.simplify(), Var::U, a, b, tol)?)
}

/// First integrals of the Pinney variable `x` driven with oscillators `y`, `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleInvariants<T> {
    /// `((y vx - x vy)^2 + k (y/x)^2) / 2`.
    pub i1: T,
    /// `((x vz - z vx)^2 + k (z/x)^2) / 2`.
    pub i2: T,
    /// `y vz - z vy`.
    pub w: T,
}

pub fn triple_invariants<T: Real>(st: &ErmakovState<T>, k: T) -> Result<TripleInvariants<T>> {
    if st.x == T::zero() {
        return Err(Error::Precondition("the invariants need x != 0".into()));
    }
    let half = T::lit(0.5);
    let (ry, rz) = (st.y / st.x, st.z / st.x);
    let a = st.y * st.vx - st.x * st.vy;
    let b = st.x * st.vz - st.z * st.vx;
    Ok(TripleInvariants {
        i1: half * (a * a + k * ry * ry),
        i2: half * (b * b + k * rz * rz),
        w: st.y * st.vz - st.z * st.vy,
    })
}
