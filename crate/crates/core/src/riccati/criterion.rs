use super::RiccatiProblem;
use crate::error::{Error, Result};
use crate::exprfn::{Env, Expr};
use crate::numerics::{check_samples, constancy, quad, ConstancyReport, NumericError, Trajectory};
use crate::sl2::{gauge_transform, ExtReal, GaugeCurve, Mat2, Sl2Coeffs};
use crate::{linspace, Real};

const GRID_POINTS: usize = 200;

/// Target equation `y' = D(t) (c0 + c1 y + c2 y^2)` with constant `c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvableTarget<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub d: Expr,
}

/// Outcome of an accepted integrability check: `y = G(t) x` turns the
/// equation into the target, which a reparametrization by `integral of D`
/// makes autonomous.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport<T> {
    pub k: T,
    pub l: T,
    pub target: SolvableTarget<T>,
    /// `G(t)`.
    pub scaling: Expr,
    pub diagnostics: ConstancyReport<T>,
}

impl<T: Real> IntegrabilityReport<T> {
    /// The gauge curve `diag(sqrt(G), 1/sqrt(G))` realizing `y = G x`.
    pub fn gauge(&self) -> GaugeCurve {
        GaugeCurve::diag(self.scaling.clone().sqrt()).expect("time-only scaling")
    }

    /// `D(t) (c0, c1, c2)` as coefficients.
    pub fn target_coeffs(&self) -> Sl2Coeffs {
        let d = &self.target.d;
        let scaled = |c: T| (Expr::num(c.as_f64()) * d.clone()).normalize();
        Sl2Coeffs::new(scaled(self.target.c0), scaled(self.target.c1), scaled(self.target.c2))
            .expect("time-only target")
    }
}

fn sign<T: Real>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

/// Scaling criterion for integrability.
///
/// With `L = sign(b0 b2)`, evaluates
/// `K(t) = (b1 + (b2'/b2 - b0'/b0)/2) sqrt(L/(b0 b2))` on the grid and accepts
/// when it is constant within `tol`. The accepted split is `c0 = sign(b0)`,
/// `c2 = sign(b2)`, `c1 = K`, `D = sqrt(|b0 b2|)` and `G = sqrt(|b2/b0|)`.
pub fn check_integrability<T: Real>(c: &Sl2Coeffs, grid: &[T], tol: T) -> Result<IntegrabilityReport<T>> {
    if grid.len() < 2 {
        return Err(Error::Precondition("need at least two grid points".into()));
    }
    let mut signs: Option<(T, T)> = None;
    let mut k_samples = Vec::with_capacity(grid.len());
    for &t in grid {
        let [b0, b1, b2] = c.eval(t)?;
        let [db0, _, db2] = c.eval_dot(t)?;
        let prod = b0 * b2;
        if prod == T::zero() || !prod.is_finite() {
            return Err(Error::VanishingProduct { t: t.as_f64() });
        }
        let s = (sign(b0), sign(b2));
        match signs {
            None => signs = Some(s),
            Some(prev) if prev != s => return Err(Error::VanishingProduct { t: t.as_f64() }),
            Some(_) => {}
        }
        let half = T::lit(0.5);
        let k = (b1 + half * (db2 / b2 - db0 / b0)) / prod.abs().sqrt();
        k_samples.push(k);
    }
    let (c0, c2) = signs.expect("nonempty grid");
    let l = c0 * c2;
    let report = constancy(&k_samples, tol)?;
    if !report.is_constant {
        return Err(Error::Rejected {
            report: report.to_f64(),
        });
    }
    let (b0, b2) = (c.b(0).clone(), c.b(2).clone());
    let d = (Expr::num(l.as_f64()) * b0.clone() * b2.clone()).sqrt().normalize();
    let scaling = (Expr::num((c0 / c2).as_f64()) * b2 / b0).sqrt().normalize();
    Ok(IntegrabilityReport {
        k: report.mean,
        l,
        target: SolvableTarget {
            c0,
            c1: report.mean,
            c2,
            d,
        },
        scaling,
        diagnostics: report,
    })
}

/// Flow of `y' = c0 + c1 y + c2 y^2` for time `tau`, exact on the projective
/// line: the Möbius action of `exp(tau A)` with `A = [[c1/2, c0], [-c2, -c1/2]]`.
pub fn solve_constant_riccati<T: Real>(c0: T, c1: T, c2: T, tau: T, y0: ExtReal<T>) -> ExtReal<T> {
    let h = c1 / T::lit(2.0);
    Mat2::new(h, c0, -c2, -h).expm_projective(tau).mobius(y0)
}

/// Solves the problem through the criterion: scale by `G`, reparametrize by
/// `tau = integral of D`, apply the autonomous flow and scale back.
pub fn solve_via_criterion<T: Real>(p: &RiccatiProblem<T>, sample_times: &[T], tol: T) -> Result<Trajectory<T>> {
    check_samples((p.t0, p.t1), sample_times)?;
    let grid = linspace(p.t0, p.t1, GRID_POINTS);
    let report = check_integrability(&p.coeffs, &grid, tol)?;
    let SolvableTarget { c0, c1, c2, ref d } = report.target;
    let g = |t: T| -> Result<T> { Ok(report.scaling.eval(&Env::at_t(t))?) };
    let scale = |x: ExtReal<T>, k: T| match x {
        ExtReal::Finite(x) => ExtReal::Finite(x * k),
        ExtReal::Infinity => ExtReal::Infinity,
    };
    let y0 = scale(p.x0, g(p.t0)?);
    let d_const = d.as_const().map(T::lit);
    let quad_tol = T::lit(1e-13).max(T::epsilon() * T::lit(16.0));
    let mut traj = Trajectory::new(1);
    let (mut tau, mut last) = (T::zero(), p.t0);
    for &t in sample_times {
        tau = match d_const {
            Some(dc) => dc * (t - p.t0),
            None => {
                let step = quad(
                    |s| {
                        d.eval(&Env::at_t(s)).map_err(|e| NumericError::Rhs {
                            t: s.as_f64(),
                            message: e.to_string(),
                        })
                    },
                    last,
                    t,
                    quad_tol,
                )?;
                tau + step
            }
        };
        last = t;
        let y = solve_constant_riccati(c0, c1, c2, tau, y0);
        let x = scale(y, g(t)?.recip());
        traj.push(t, &[x.to_real()]);
    }
    Ok(traj)
}

/// Checks the accepted report against the coefficients on a grid: returns the
/// largest deviations of `D^2 c0 c2` from `b0 b2` (relative to `1 + |b0 b2|`)
/// and of the gauge-transformed coefficients from the target (relative to
/// `1 + |target|`).
pub fn verify_report<T: Real>(c: &Sl2Coeffs, report: &IntegrabilityReport<T>, grid: &[T]) -> Result<(T, T)> {
    let transformed = gauge_transform(c, &report.gauge());
    let target = report.target_coeffs();
    let (mut product_err, mut coeff_err) = (T::zero(), T::zero());
    let cc = report.target.c0 * report.target.c2;
    for &t in grid {
        let [b0, _, b2] = c.eval(t)?;
        let d: T = report.target.d.eval(&Env::at_t(t))?;
        product_err = product_err.max((d * d * cc - b0 * b2).abs() / (T::one() + (b0 * b2).abs()));
        let (lhs, rhs) = (transformed.eval(t)?, target.eval(t)?);
        for i in 0..3 {
            coeff_err = coeff_err.max((lhs[i] - rhs[i]).abs() / (T::one() + rhs[i].abs()));
        }
    }
    Ok((product_err, coeff_err))
}
