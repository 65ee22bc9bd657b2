use crate::error::{Error, Result};
use crate::exprfn::{Env, EvalError, Expr, Var};
use crate::sl2::{Mat2, Sl2Coeffs};
use crate::Real;

/// Curve `t -> [[alpha, beta], [gamma, delta]]` in SL(2,R), with exact
/// derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCurve {
    m: [Expr; 4],
    dm: [Expr; 4],
}

impl GaugeCurve {
    pub fn new(alpha: Expr, beta: Expr, gamma: Expr, delta: Expr) -> Result<Self> {
        let m = [alpha.simplify(), beta.simplify(), gamma.simplify(), delta.simplify()];
        for e in &m {
            if let Some(v) = e.free_vars().into_iter().find(|&v| v != Var::T) {
                return Err(Error::Precondition(format!(
                    "gauge entries may only depend on `t`, found `{}`",
                    v.name()
                )));
            }
        }
        let dm = [
            m[0].differentiate(Var::T),
            m[1].differentiate(Var::T),
            m[2].differentiate(Var::T),
            m[3].differentiate(Var::T),
        ];
        Ok(GaugeCurve { m, dm })
    }

    pub fn constant(g: Mat2<f64>) -> Self {
        let [a, b, c, d] = g.to_array().map(Expr::num);
        GaugeCurve::new(a, b, c, d).expect("constant entries")
    }

    pub fn identity() -> Self {
        GaugeCurve::constant(Mat2::identity())
    }

    /// `diag(s(t), 1/s(t))`.
    pub fn diag(s: Expr) -> Result<Self> {
        let inv = s.clone().recip();
        GaugeCurve::new(s, Expr::zero(), Expr::zero(), inv)
    }

    /// `[[1, -x1(t)], [0, 1]]`, the shift `x -> x - x1(t)`.
    pub fn particular(x1: Expr) -> Result<Self> {
        GaugeCurve::new(Expr::one(), -x1, Expr::zero(), Expr::one())
    }

    pub fn entries(&self) -> &[Expr; 4] {
        &self.m
    }

    pub fn derivatives(&self) -> &[Expr; 4] {
        &self.dm
    }

    /// Pointwise product `self(t) * other(t)`.
    pub fn compose(&self, other: &GaugeCurve) -> GaugeCurve {
        let [a, b, c, d] = &self.m;
        let [p, q, r, s] = &other.m;
        GaugeCurve::new(
            a.clone() * p.clone() + b.clone() * r.clone(),
            a.clone() * q.clone() + b.clone() * s.clone(),
            c.clone() * p.clone() + d.clone() * r.clone(),
            c.clone() * q.clone() + d.clone() * s.clone(),
        )
        .expect("product of time-only entries")
    }

    pub fn eval<T: Real>(&self, t: T) -> Result<Mat2<T>, EvalError> {
        let env = Env::at_t(t);
        Ok(Mat2::new(
            self.m[0].eval(&env)?,
            self.m[1].eval(&env)?,
            self.m[2].eval(&env)?,
            self.m[3].eval(&env)?,
        ))
    }

    pub fn eval_dot<T: Real>(&self, t: T) -> Result<Mat2<T>, EvalError> {
        let env = Env::at_t(t);
        Ok(Mat2::new(
            self.dm[0].eval(&env)?,
            self.dm[1].eval(&env)?,
            self.dm[2].eval(&env)?,
            self.dm[3].eval(&env)?,
        ))
    }

    /// Checks `|det - 1| <= tol` on the grid.
    pub fn check_unimodular<T: Real>(&self, grid: &[T], tol: T) -> Result<()> {
        for &t in grid {
            let det = self.eval(t)?.det();
            if !((det - T::one()).abs() <= tol) {
                return Err(Error::Precondition(format!(
                    "gauge curve has determinant {det} at t = {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Affine action of a gauge curve on coefficients: if `x(t)` solves the
/// system for `c`, then `g(t)` applied to `x(t)` solves it for the result.
pub fn gauge_transform(c: &Sl2Coeffs, g: &GaugeCurve) -> Sl2Coeffs {
    let [b0, b1, b2] = c.exprs().clone();
    let [al, be, ga, de] = g.entries().clone();
    let [dal, dbe, dga, dde] = g.derivatives().clone();
    let two = || Expr::num(2.0);

    let n2 = de.clone() * de.clone() * b2.clone() - de.clone() * ga.clone() * b1.clone()
        + ga.clone() * ga.clone() * b0.clone()
        + ga.clone() * dde.clone()
        - de.clone() * dga.clone();
    let n1 = -(two() * be.clone() * de.clone() * b2.clone())
        + (al.clone() * de.clone() + be.clone() * ga.clone()) * b1.clone()
        - two() * al.clone() * ga.clone() * b0.clone()
        + de.clone() * dal.clone()
        - al.clone() * dde
        + be.clone() * dga
        - ga * dbe.clone();
    let n0 = be.clone() * be.clone() * b2 - al.clone() * be.clone() * b1 + al.clone() * al.clone() * b0 + al * dbe
        - be * dal;
    Sl2Coeffs::new(n0.simplify(), n1.simplify(), n2.simplify()).expect("time-only inputs")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfn::parse;

    fn assert_coeffs_close(a: &Sl2Coeffs, b: &Sl2Coeffs, grid: &[f64], tol: f64) {
        for &t in grid {
            let (x, y) = (a.eval(t).unwrap(), b.eval(t).unwrap());
            for i in 0..3 {
                assert!(
                    (x[i] - y[i]).abs() <= tol * (1.0 + y[i].abs()),
                    "b{i} at {t}: {} vs {}",
                    x[i],
                    y[i]
                );
            }
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let c = Sl2Coeffs::parse("sin(t)", "t^2", "exp(t)").unwrap();
        let out = gauge_transform(&c, &GaugeCurve::identity());
        for i in 0..3 {
            assert!(out.b(i).equivalent(c.b(i)), "{} vs {}", out.b(i), c.b(i));
        }
    }

    #[test]
    fn constant_diagonal_scales() {
        let c = Sl2Coeffs::parse("1+t", "t", "3").unwrap();
        let g = GaugeCurve::constant(Mat2::diag(2.0, 0.5));
        let out = gauge_transform(&c, &g);
        let expect = Sl2Coeffs::parse("4*(1+t)", "t", "0.75").unwrap();
        assert_coeffs_close(&out, &expect, &[0.0, 0.5, 2.0], 1e-15);
    }

    #[test]
    fn particular_solution_kills_b0() {
        let c = Sl2Coeffs::parse("1", "0", "1").unwrap();
        let out = gauge_transform(&c, &GaugeCurve::particular(parse("tan(t)").unwrap()).unwrap());
        let expect = Sl2Coeffs::parse("0", "2*tan(t)", "1").unwrap();
        assert_coeffs_close(&out, &expect, &[0.0, 0.3, 1.2], 1e-14);
    }

    #[test]
    fn composition_and_unimodularity() {
        let g = GaugeCurve::diag(parse("exp(t)").unwrap()).unwrap();
        let h = GaugeCurve::particular(parse("t").unwrap()).unwrap();
        let gh = g.compose(&h);
        let grid = [0.0, 0.7, 1.5];
        gh.check_unimodular(&grid, 1e-12).unwrap();
        for &t in &grid {
            let lhs = gh.eval(t).unwrap();
            let rhs = g.eval(t).unwrap() * h.eval(t).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
        let bad = GaugeCurve::constant(Mat2::diag(2.0, 2.0));
        assert!(bad.check_unimodular(&grid, 1e-9).is_err());
    }
}
