use crate::error::{Error, Result};
use crate::exprfn::{Env, Expr, Var};
use crate::numerics::{quad, NumericError};
use crate::sl2::{gauge_transform, GaugeCurve, Sl2Coeffs};
use crate::{linspace, Real};

const RESIDUAL_POINTS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-6;
const PIECES: usize = 64;

/// Removes `b0` with the shift `z = x - x1(t)`, where `x1` is a particular
/// solution; the result is `(0, b1 + 2 b2 x1, b2)`.
///
/// `x1` is checked against the equation on 200 points of `t_span` first.
pub fn reduce_with_particular(c: &Sl2Coeffs, x1: &Expr, t_span: (f64, f64)) -> Result<Sl2Coeffs> {
    let dx1 = x1.differentiate(Var::T);
    let mut worst: f64 = 0.0;
    for t in linspace(t_span.0, t_span.1, RESIDUAL_POINTS) {
        let env = Env::at_t(t);
        let x = x1.eval(&env)?;
        let r = (dx1.eval(&env)? - c.riccati(t, x)?).abs();
        worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
    }
    if worst > RESIDUAL_TOL {
        return Err(Error::NotASolution {
            residual: worst,
            tol: RESIDUAL_TOL,
        });
    }
    let g = GaugeCurve::particular(x1.clone())?;
    let out = gauge_transform(c, &g);
    // b0' is the residual of x1, zero up to the check above
    Sl2Coeffs::new(Expr::zero(), out.b(1).clone(), out.b(2).clone())
}

/// `s -> integral of e from t0 to s`, evaluated from precomputed nodes.
struct Primitive<'a, T> {
    e: &'a Expr,
    rate: Option<T>,
    t0: T,
    t1: T,
    nodes: Vec<T>,
    values: Vec<T>,
    tol: T,
}

impl<'a, T: Real> Primitive<'a, T> {
    fn new(e: &'a Expr, t0: T, t1: T, tol: T) -> Result<Self, NumericError> {
        let rate = e.as_const().map(T::lit);
        let mut p = Primitive {
            e,
            rate,
            t0,
            t1,
            nodes: Vec::new(),
            values: Vec::new(),
            tol,
        };
        if rate.is_none() && t0 != t1 {
            p.nodes = linspace(t0, t1, PIECES + 1);
            p.values.push(T::zero());
            for w in p.nodes.windows(2) {
                let step = integrate(e, w[0], w[1], tol)?;
                p.values.push(*p.values.last().unwrap() + step);
            }
        }
        Ok(p)
    }

    fn at(&self, s: T) -> Result<T, NumericError> {
        if let Some(r) = self.rate {
            return Ok(r * (s - self.t0));
        }
        if self.nodes.is_empty() {
            return Ok(T::zero());
        }
        let frac = ((s - self.t0) / (self.t1 - self.t0)).max(T::zero());
        let i = (frac * T::lit(PIECES as f64))
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(PIECES);
        Ok(self.values[i] + integrate(self.e, self.nodes[i], s, self.tol)?)
    }
}

fn integrate<T: Real>(e: &Expr, a: T, b: T, tol: T) -> Result<T, NumericError> {
    quad(|s| eval_at(e, s), a, b, tol)
}

fn eval_at<T: Real>(e: &Expr, s: T) -> Result<T, NumericError> {
    e.eval(&Env::at_t(s)).map_err(|err| NumericError::Rhs {
        t: s.as_f64(),
        message: err.to_string(),
    })
}

/// Closed-form solution of `z' = b1 z + b2 z^2` from `z(t0) = z0`:
/// `z = e^B / (1/z0 - integral of b2 e^B)` with `B` the integral of `b1`.
///
/// Fails with [`Error::BlowUp`] when the denominator changes sign on the way,
/// bracketing the pole.
pub fn solve_bernoulli_reduced<T: Real>(c: &Sl2Coeffs, z0: T, t0: T, t: T, tol: T) -> Result<T> {
    if !c.b(0).is_identically_zero() {
        return Err(Error::Precondition(format!(
            "reduced equation must have b0 = 0, got {}",
            c.b(0)
        )));
    }
    if z0 == T::zero() {
        return Ok(T::zero());
    }
    let (b1, b2) = (c.b(1), c.b(2));
    let big_b = Primitive::new(b1, t0, t, tol * T::lit(0.1))?;
    let inv = z0.recip();
    let mut denom = inv;
    let mut acc = T::zero();
    for w in linspace(t0, t, PIECES + 1).windows(2) {
        let piece = quad(|s| Ok(eval_at(b2, s)? * big_b.at(s)?.exp()), w[0], w[1], tol)?;
        acc = acc + piece;
        let next = inv - acc;
        if next == T::zero() || next.signum() != denom.signum() {
            let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            return Err(Error::BlowUp {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        denom = next;
    }
    Ok(big_b.at(t)?.exp() / denom)
}

/// Solution of the linear equation `x' = b0 + b1 x` from `x(t0) = x0` by
/// two nested quadratures.
pub fn linear_inhomogeneous_solve<T: Real>(b0: &Expr, b1: &Expr, x0: T, t0: T, t: T, tol: T) -> Result<T> {
    let big_b = Primitive::new(b1, t0, t, tol * T::lit(0.1))?;
    let forcing = if b0.is_identically_zero() {
        T::zero()
    } else {
        quad(|s| Ok(eval_at(b0, s)? * (-big_b.at(s)?).exp()), t0, t, tol)?
    };
    Ok(big_b.at(t)?.exp() * (x0 + forcing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::parse;

    #[test]
    fn tangent_particular_solution() {
        let c = Sl2Coeffs::parse("1", "0", "1").unwrap();
        let red = reduce_with_particular(&c, &parse("tan(t)").unwrap(), (0.0, 1.2)).unwrap();
        assert!(red.b(0).is_identically_zero());
        for &t in &[0.0, 0.4, 1.1] {
            let [_, b1, b2] = red.eval(t).unwrap();
            assert!((b1 - 2.0 * f64::tan(t)).abs() < 1e-12);
            assert_eq!(b2, 1.0);
        }
    }

    #[test]
    fn linear_equations_reduce_trivially() {
        let c = Sl2Coeffs::parse("exp(t)", "1", "0").unwrap();
        let red = reduce_with_particular(&c, &parse("t*exp(t)").unwrap(), (0.0, 2.0)).unwrap();
        assert!(red.b(0).is_identically_zero());
        assert!(red.b(2).is_identically_zero());
        assert_eq!(red.b(1), &Expr::one());
    }

    #[test]
    fn wrong_particular_solution_is_rejected() {
        let c = Sl2Coeffs::parse("1", "0", "1").unwrap();
        let err = reduce_with_particular(&c, &parse("t").unwrap(), (0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NotASolution { .. }));
    }

    #[test]
    fn bernoulli_closed_forms() {
        let exp_growth = Sl2Coeffs::parse("0", "1", "0").unwrap();
        let z = solve_bernoulli_reduced(&exp_growth, 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((z - std::f64::consts::E).abs() < 1e-10);
        let square = Sl2Coeffs::parse("0", "0", "1").unwrap();
        let z = solve_bernoulli_reduced(&square, 1.0_f64, 0.0, 0.5, 1e-12).unwrap();
        assert!((z - 2.0).abs() < 1e-10);
        assert_eq!(solve_bernoulli_reduced(&square, 0.0, 0.0, 5.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_pole_is_bracketed() {
        let square = Sl2Coeffs::parse("0", "0", "1").unwrap();
        match solve_bernoulli_reduced(&square, 1.0, 0.0, 2.0, 1e-10) {
            Err(Error::BlowUp { lo, hi }) => assert!(lo <= 1.0 && 1.0 <= hi && hi - lo < 0.05),
            other => panic!("{other:?}"),
        }
        let not_reduced = Sl2Coeffs::parse("1", "0", "1").unwrap();
        assert!(solve_bernoulli_reduced(&not_reduced, 1.0, 0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn bernoulli_with_variable_rate() {
        // z' = 2 tan(t) z + z^2 is the tangent equation shifted by tan(t)
        let c = Sl2Coeffs::parse("0", "2*tan(t)", "1").unwrap();
        let (z0, t) = (0.1, 0.4_f64);
        let z = solve_bernoulli_reduced(&c, z0, 0.0, t, 1e-12).unwrap();
        let exact = (t + z0.atan()).tan() - t.tan();
        assert!((z - exact).abs() < 1e-9, "{z} vs {exact}");
    }

    #[test]
    fn linear_closed_forms() {
        let one = Expr::one();
        let zero = Expr::zero();
        let x = linear_inhomogeneous_solve(&one, &one, 0.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((x - (std::f64::consts::E - 1.0)).abs() < 1e-10);
        let b0 = parse("cos(t)").unwrap();
        let x = linear_inhomogeneous_solve(&b0, &zero, 2.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((x - (2.0 + 1f64.sin())).abs() < 1e-10);
        let b1 = parse("t").unwrap();
        let x = linear_inhomogeneous_solve(&zero, &b1, 3.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((x - 3.0 * 2f64.exp()).abs() < 1e-9);
    }
}
