use super::NumericError;
use crate::exprfn::{Env, Expr, Var};
use crate::Real;

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `f` may fail; failures and non-finite samples abort the whole integral.
/// For `a > b` the result is `-quad(f, b, a, tol)`.
pub fn quad<T, F>(mut f: F, a: T, b: T, tol: T) -> Result<T, NumericError>
where
    T: Real,
    F: FnMut(T) -> Result<T, NumericError>,
{
    if a == b {
        return Ok(T::zero());
    }
    if b < a {
        return quad(f, b, a, tol).map(|v| -v);
    }
    let mut sample = |x: T| -> Result<T, NumericError> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumericError::NonFinite { at: x.as_f64() })
        }
    };
    let half = T::lit(0.5);
    let m = half * (a + b);
    let (fa, fm, fb) = (sample(a)?, sample(m)?, sample(b)?);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(&mut sample, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T, F>(f: &mut F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> Result<T, NumericError>
where
    T: Real,
    F: FnMut(T) -> Result<T, NumericError>,
{
    let half = T::lit(0.5);
    let m = half * (a + b);
    let (lm, rm) = (half * (a + m), half * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let floor = T::lit(16.0) * T::epsilon() * (left + right).abs();
    if delta.abs() <= T::lit(15.0) * tol.max(floor) || !(m > a && b > m) {
        return Ok(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return Err(NumericError::SubdivisionLimit {
            a: a.as_f64(),
            b: b.as_f64(),
        });
    }
    let l = recurse(f, a, m, fa, flm, fm, left, half * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, half * tol, depth - 1)?;
    Ok(l + r)
}

/// Integrates an expression in `var` from `a` to `b`.
pub fn quad_expr<T: Real>(e: &Expr, var: Var, a: T, b: T, tol: T) -> Result<T, NumericError> {
    let mut env = Env::new();
    quad(
        |x| {
            env.set(var, x);
            e.eval(&env).map_err(|err| NumericError::Rhs {
                t: x.as_f64(),
                message: err.to_string(),
            })
        },
        a,
        b,
        tol,
    )
}
