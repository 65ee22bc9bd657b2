use crate::error::{Error, Result};
use crate::exprfn::{parse, Env, EvalError, Expr, Var};
use crate::numerics::{fmt_e12, integrate_ode, IntegratorConfig, RhsError};
use crate::sl2::Mat2;
use crate::Real;

/// Coefficient curve `(b0, b1, b2)` of `x' = b0 + b1 x + b2 x^2` and of every
/// other system sharing its equation on SL(2,R), with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Coeffs {
    b: [Expr; 3],
    db: [Expr; 3],
}

impl Sl2Coeffs {
    /// Fails when a coefficient depends on anything other than `t`.
    pub fn new(b0: Expr, b1: Expr, b2: Expr) -> Result<Self> {
        let b = [b0.simplify(), b1.simplify(), b2.simplify()];
        for (i, e) in b.iter().enumerate() {
            if let Some(v) = e.free_vars().into_iter().find(|&v| v != Var::T) {
                return Err(Error::Precondition(format!(
                    "coefficient b{i} depends on `{}`; only `t` is allowed",
                    v.name()
                )));
            }
        }
        let db = [
            b[0].differentiate(Var::T),
            b[1].differentiate(Var::T),
            b[2].differentiate(Var::T),
        ];
        Ok(Sl2Coeffs { b, db })
    }

    pub fn parse(b0: &str, b1: &str, b2: &str) -> Result<Self> {
        Sl2Coeffs::new(parse(b0)?, parse(b1)?, parse(b2)?)
    }

    pub fn constant(b0: f64, b1: f64, b2: f64) -> Self {
        Sl2Coeffs::new(Expr::num(b0), Expr::num(b1), Expr::num(b2)).expect("constants depend on nothing")
    }

    pub fn b(&self, i: usize) -> &Expr {
        &self.b[i]
    }

    pub fn db(&self, i: usize) -> &Expr {
        &self.db[i]
    }

    pub fn exprs(&self) -> &[Expr; 3] {
        &self.b
    }

    /// True when no coefficient depends on `t`.
    pub fn is_constant(&self) -> bool {
        self.b.iter().all(|e| !e.depends_on(Var::T))
    }

    pub fn eval<T: Real>(&self, t: T) -> Result<[T; 3], EvalError> {
        let env = Env::at_t(t);
        Ok([self.b[0].eval(&env)?, self.b[1].eval(&env)?, self.b[2].eval(&env)?])
    }

    pub fn eval_dot<T: Real>(&self, t: T) -> Result<[T; 3], EvalError> {
        let env = Env::at_t(t);
        Ok([self.db[0].eval(&env)?, self.db[1].eval(&env)?, self.db[2].eval(&env)?])
    }

    /// Riccati vector field `b0 + b1 x + b2 x^2` at `(t, x)`.
    pub fn riccati<T: Real>(&self, t: T, x: T) -> Result<T, EvalError> {
        let [b0, b1, b2] = self.eval(t)?;
        Ok(b0 + x * (b1 + b2 * x))
    }

    /// Right-hand side for [`crate::numerics::integrate_ode`] on the Riccati
    /// equation.
    pub fn riccati_rhs<T: Real>(&self) -> impl FnMut(T, &[T], &mut [T]) -> Result<(), RhsError> + '_ {
        move |t, y, dy| {
            dy[0] = self.riccati(t, y[0])?;
            Ok(())
        }
    }
}

/// The Lie algebra element `A(t) = [[b1/2, b0], [-b2, -b1/2]]`.
pub fn algebra_matrix<T: Real>(c: &Sl2Coeffs, t: T) -> Result<Mat2<T>, EvalError> {
    let [b0, b1, b2] = c.eval(t)?;
    let h = b1 / T::lit(2.0);
    Ok(Mat2::new(h, b0, -b2, -h))
}

/// Sampled curve of matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat2Curve<T> {
    pub times: Vec<T>,
    pub mats: Vec<Mat2<T>>,
    /// Determinants before renormalization.
    pub raw_dets: Vec<T>,
}

impl<T: Real> Mat2Curve<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,a,b,c,d`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,a,b,c,d\n");
        for (t, m) in self.times.iter().zip(&self.mats) {
            let row: Vec<String> = std::iter::once(*t)
                .chain(m.to_array())
                .map(|v| fmt_e12(v.as_f64()))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Solves `Phi' = A(t) Phi` with `Phi(t0) = I` and samples it; each sample is
/// divided by the square root of its determinant.
pub fn fundamental_solution<T: Real>(
    c: &Sl2Coeffs,
    t_span: (T, T),
    sample_times: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Mat2Curve<T>> {
    let rhs = |t: T, y: &[T], dy: &mut [T]| -> Result<(), RhsError> {
        let a = algebra_matrix(c, t)?;
        let phi = Mat2::new(y[0], y[1], y[2], y[3]);
        let d = a * phi;
        dy.copy_from_slice(&d.to_array());
        Ok(())
    };
    let id = Mat2::<T>::identity().to_array();
    let traj = integrate_ode(rhs, &id, t_span, sample_times, cfg)?;
    if let Some(ev) = traj.events().first() {
        return Err(Error::BlowUp {
            lo: ev.t.as_f64(),
            hi: ev.t.as_f64(),
        });
    }
    let mut curve = Mat2Curve {
        times: traj.times().to_vec(),
        mats: Vec::with_capacity(traj.len()),
        raw_dets: Vec::with_capacity(traj.len()),
    };
    for s in traj.states() {
        let m = Mat2::new(s[0], s[1], s[2], s[3]);
        curve.raw_dets.push(m.det());
        curve.mats.push(m.renormalized());
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linspace;

    #[test]
    fn algebra_matrix_examples() {
        let m = algebra_matrix(&Sl2Coeffs::constant(1.0, 0.0, 1.0), 0.0).unwrap();
        assert_eq!(m, Mat2::new(0.0, 1.0, -1.0, -0.0));
        let m = algebra_matrix(&Sl2Coeffs::constant(0.0, 1.0, 0.0), 0.0).unwrap();
        assert_eq!(m, Mat2::new(0.5, 0.0, -0.0, -0.5));
        let m = algebra_matrix(&Sl2Coeffs::constant(1.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(m, Mat2::new(0.0, 1.0, -0.0, -0.0));
    }

    #[test]
    fn derivatives_are_cached() {
        let c = Sl2Coeffs::parse("exp(-0.2*t)", "0", "t^2").unwrap();
        let d = c.eval_dot(1.0_f64).unwrap();
        assert!((d[0] + 0.2 * (-0.2_f64).exp()).abs() < 1e-15);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 2.0);
    }

    #[test]
    fn only_time_is_allowed() {
        assert!(matches!(Sl2Coeffs::parse("x", "0", "1"), Err(Error::Precondition(_))));
        assert!(matches!(Sl2Coeffs::parse("1+", "0", "1"), Err(Error::Parse(_))));
    }

    #[test]
    fn rotation_and_translation_flows() {
        let grid = linspace(0.0_f64, 2.0, 9);
        let cfg = IntegratorConfig::default();
        let rot = fundamental_solution(&Sl2Coeffs::constant(1.0, 0.0, 1.0), (0.0, 2.0), &grid, &cfg).unwrap();
        for (t, m) in rot.times.iter().zip(&rot.mats) {
            let exact = Mat2::new(t.cos(), t.sin(), -t.sin(), t.cos());
            assert!(m.max_abs_diff(&exact) < 1e-8);
        }
        let tr = fundamental_solution(&Sl2Coeffs::constant(1.0, 0.0, 0.0), (0.0, 2.0), &grid, &cfg).unwrap();
        for (t, m) in tr.times.iter().zip(&tr.mats) {
            assert!(m.max_abs_diff(&Mat2::new(1.0, *t, 0.0, 1.0)) < 1e-12);
        }
    }

    #[test]
    fn determinant_stays_one_before_renormalization() {
        let c = Sl2Coeffs::parse("1 + sin(t)", "t", "exp(-t)").unwrap();
        let grid = linspace(0.0_f64, 2.0, 21);
        let curve = fundamental_solution(&c, (0.0, 2.0), &grid, &IntegratorConfig::default()).unwrap();
        for d in &curve.raw_dets {
            assert!((d - 1.0).abs() < 1e-8, "det {d}");
        }
        assert!(curve
            .to_csv()
            .starts_with("t,a,b,c,d\n0.000000000000e+00,1.000000000000e+00,"));
    }
}
